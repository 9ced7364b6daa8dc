#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "coexist/checksum.hpp"
#include "coexist/cnn.hpp"
#include "coexist/coexistence.hpp"
#include "coexist/decision.hpp"
#include "coexist/detector.hpp"
#include "coexist/errors.hpp"
#include "coexist/framing.hpp"
#include "coexist/iq_file.hpp"
#include "coexist/waveforms.hpp"

namespace py = pybind11;
using namespace coexist;

namespace {

using CArray = py::array_t<std::complex<float>, py::array::c_style | py::array::forcecast>;
using FArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

CArray to_numpy(const IqStream& x) {
  CArray out(static_cast<py::ssize_t>(x.samples.size()));
  std::copy(x.samples.begin(), x.samples.end(), out.mutable_data());
  return out;
}

IqStream from_numpy(const CArray& a, double fs, double t0) {
  if (a.ndim() != 1) throw ShapeError("expected a 1-D complex64 array");
  IqStream x;
  x.sample_rate_hz = fs;
  x.t0_s = t0;
  x.samples.assign(a.data(), a.data() + a.size());
  return x;
}

nn::Tensor tensor_from(const FArray& a) {
  nn::Tensor t;
  for (py::ssize_t i = 0; i < a.ndim(); ++i) t.dims.push_back(static_cast<std::size_t>(a.shape(i)));
  t.data.assign(a.data(), a.data() + a.size());
  return t;
}

FArray tensor_to(const nn::Tensor& t) {
  std::vector<py::ssize_t> shape(t.dims.begin(), t.dims.end());
  FArray out(shape);
  std::copy(t.data.begin(), t.data.end(), out.mutable_data());
  return out;
}

std::vector<framing::IqWindow> windows_from(const FArray& a) {
  if (a.ndim() != 3 || a.shape(1) != framing::kWindowLen || a.shape(2) != framing::kChannels) {
    throw ShapeError("expected windows of shape [n, 1024, 2]");
  }
  std::vector<framing::IqWindow> w(static_cast<std::size_t>(a.shape(0)));
  for (std::size_t i = 0; i < w.size(); ++i) {
    std::copy_n(a.data() + i * framing::kWindowValues, framing::kWindowValues, w[i].data.begin());
  }
  return w;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of the coexist radar/cellular toolkit";

  py::register_exception<Error>(m, "Error");
  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<FormatError>(m, "FormatError");
  py::register_exception<ShapeError>(m, "ShapeError");
  py::register_exception<IoError>(m, "IoError");

  m.def("xxh64", [](py::bytes b, std::uint64_t seed) {
    const std::string s = b;
    return xxh64(s.data(), s.size(), seed);
  }, py::arg("data"), py::arg("seed") = 0);

  m.def("canonical_arch_string", &nn::canonical_arch_string);
  m.def("canonical_arch_hash", [] {
    const auto h = nn::canonical_arch_hash();
    return to_hex(std::string_view(reinterpret_cast<const char*>(h.data()), h.size()));
  });
  m.def("canonical_tensor_shapes", &nn::canonical_tensor_shapes);

  m.def("gen_radar", [](double duration_s, std::uint64_t seed, double fs) {
    return to_numpy(waveforms::gen_radar(waveforms::RadarWaveformConfig{}, duration_s, fs, seed));
  }, py::arg("duration_s"), py::arg("seed") = 0, py::arg("sample_rate_hz") = 1.024e6);
  m.def("gen_cellular", [](double duration_s, std::uint64_t seed, double fs) {
    return to_numpy(waveforms::gen_cellular(waveforms::CellularWaveformConfig{}, duration_s, fs, seed));
  }, py::arg("duration_s"), py::arg("seed") = 0, py::arg("sample_rate_hz") = 1.024e6);
  m.def("gen_awgn", [](double power, std::size_t n, std::uint64_t seed) {
    return to_numpy(waveforms::gen_awgn(power, n, seed));
  }, py::arg("power"), py::arg("n"), py::arg("seed") = 0);

  m.def("write_iqb", [](const std::string& path, const CArray& a, double fs, double t0) {
    write_iqb(path, from_numpy(a, fs, t0));
  }, py::arg("path"), py::arg("samples"), py::arg("sample_rate_hz") = 1.024e6, py::arg("t0_s") = 0.0);
  m.def("read_iqb", [](const std::string& path) {
    const auto x = read_iqb(path);
    return py::make_tuple(to_numpy(x), x.sample_rate_hz, x.t0_s);
  });

  m.def("read_dataset", [](const std::string& path) {
    const auto ds = framing::read_dataset(path);
    FArray x({static_cast<py::ssize_t>(ds.windows.size()), py::ssize_t{1024}, py::ssize_t{2}});
    py::array_t<std::uint8_t> y(static_cast<py::ssize_t>(ds.windows.size()));
    for (std::size_t i = 0; i < ds.windows.size(); ++i) {
      std::copy(ds.windows[i].window.data.begin(), ds.windows[i].window.data.end(),
                x.mutable_data() + i * framing::kWindowValues);
      y.mutable_data()[i] = ds.windows[i].label;
    }
    return py::make_tuple(x, y);
  });
  m.def("dataset_checksum", &framing::dataset_checksum);

  m.def("energy_threshold", [](const FArray& windows, double pfa) {
    return detect::calibrate_energy_threshold(windows_from(windows), pfa);
  }, py::arg("windows"), py::arg("target_pfa"));

  m.def("majority", [](const std::vector<int>& labels) {
    decision::VoteConfig cfg;
    cfg.vote_size = labels.size();
    std::vector<detect::DetectorVerdict> v(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
      v[i].label = static_cast<std::uint8_t>(labels[i] != 0);
      v[i].window_start_sample = i * cfg.window_len;
    }
    return decision::majority(v, cfg, 0.0).radar_present;
  });

  m.def("spectrogram", [](const CArray& a, std::size_t nfft, std::size_t hop, double fs) {
    const auto s = control::spectrogram(from_numpy(a, fs, 0.0), nfft, hop);
    std::vector<double> t;
    FArray mag({static_cast<py::ssize_t>(s.frames.size()), static_cast<py::ssize_t>(nfft)});
    for (std::size_t i = 0; i < s.frames.size(); ++i) {
      t.push_back(s.frames[i].t_s);
      std::copy(s.frames[i].magnitude_db.begin(), s.frames[i].magnitude_db.end(), mag.mutable_data() + i * nfft);
    }
    return py::make_tuple(t, mag);
  }, py::arg("samples"), py::arg("nfft") = 1024, py::arg("hop") = 512, py::arg("sample_rate_hz") = 1.024e6);

  py::class_<nn::CnnModel>(m, "Model")
      .def_static("zeros", [] { return nn::make_canonical_model(nn::InitKind::zeros); })
      .def_static("random", [](std::uint64_t seed) { return nn::make_canonical_model(nn::InitKind::random, seed); },
                  py::arg("seed") = 0)
      .def_static("load", &nn::load_weights, py::arg("path"), py::arg("allow_custom_arch") = false)
      .def("save", [](const nn::CnnModel& mdl, const std::string& path) { nn::save_weights(mdl, path); })
      .def("forward", [](const nn::CnnModel& mdl, const FArray& x) {
        return tensor_to(nn::cnn_forward(mdl, tensor_from(x)));
      });
}
