#pragma once

#include <nlohmann/json_fwd.hpp>
#include <string>

#include "coexist/iq.hpp"

namespace coexist {

/// Writes `x` as .iqb ("IQB1" header + interleaved f32 I/Q). When `meta`
/// is non-null a sidecar `<path>.json` is written with it.
void write_iqb(const std::string& path, const IqStream& x, const nlohmann::json* meta = nullptr);

IqStream read_iqb(const std::string& path);

/// Sidecar metadata, or an empty object when no sidecar exists.
nlohmann::json read_iqb_meta(const std::string& path);

}  // namespace coexist
