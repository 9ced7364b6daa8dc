"""Radar/cellular coexistence toolkit (native core)."""

from ._core import (
    ConfigError,
    Error,
    FormatError,
    IoError,
    Model,
    ShapeError,
    canonical_arch_hash,
    canonical_arch_string,
    canonical_tensor_shapes,
    dataset_checksum,
    energy_threshold,
    gen_awgn,
    gen_cellular,
    gen_radar,
    majority,
    read_dataset,
    read_iqb,
    spectrogram,
    write_iqb,
    xxh64,
)

__all__ = [
    "ConfigError",
    "Error",
    "FormatError",
    "IoError",
    "Model",
    "ShapeError",
    "canonical_arch_hash",
    "canonical_arch_string",
    "canonical_tensor_shapes",
    "dataset_checksum",
    "energy_threshold",
    "gen_awgn",
    "gen_cellular",
    "gen_radar",
    "majority",
    "read_dataset",
    "read_iqb",
    "spectrogram",
    "write_iqb",
    "xxh64",
]
