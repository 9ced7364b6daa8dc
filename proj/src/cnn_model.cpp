#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "coexist/checksum.hpp"
#include "coexist/cnn.hpp"
#include "coexist/errors.hpp"
#include "coexist/rng.hpp"

namespace coexist::nn {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Canonical layer table. Conv/dense entries carry (in, out); nonlocal
// carries C; pool carries its size.
enum class Kind { conv1d, relu, nonlocal, maxpool1d, flatten, dense, softmax };

struct LayerDesc {
  std::string name;
  Kind kind;
  std::size_t a = 0;
  std::size_t b = 0;
};

const std::vector<LayerDesc>& canonical_layers() {
  static const std::vector<LayerDesc> layers = [] {
    std::vector<LayerDesc> v;
    const std::size_t widths[4] = {32, 64, 128, 128};
    std::size_t in = 2;
    for (int blk = 0; blk < 4; ++blk) {
      const std::string p = "block" + std::to_string(blk + 1) + ".";
      const std::size_t w = widths[blk];
      v.push_back({p + "conv1", Kind::conv1d, in, w});
      v.push_back({p + "relu1", Kind::relu});
      v.push_back({p + "conv2", Kind::conv1d, w, w});
      v.push_back({p + "relu2", Kind::relu});
      if (blk < 2) v.push_back({p + "nlb", Kind::nonlocal, w});
      v.push_back({p + "pool", Kind::maxpool1d, 2});
      in = w;
    }
    v.push_back({"head.flatten", Kind::flatten});
    v.push_back({"head.dense1", Kind::dense, 64 * 128, 128});
    v.push_back({"head.relu1", Kind::relu});
    v.push_back({"head.dense2", Kind::dense, 128, 2});
    v.push_back({"head.softmax", Kind::softmax});
    return v;
  }();
  return layers;
}

constexpr std::size_t kKernel = 3;
constexpr std::size_t kPadding = 1;

std::string describe(const LayerDesc& d) {
  std::ostringstream s;
  s << d.name << '=';
  switch (d.kind) {
    case Kind::conv1d: s << "conv1d(in=" << d.a << ",out=" << d.b << ",k=3,p=1)"; break;
    case Kind::relu: s << "relu"; break;
    case Kind::nonlocal: s << "nonlocal(c=" << d.a << ",inner=" << d.a / 2 << ",embedded_gaussian)"; break;
    case Kind::maxpool1d: s << "maxpool1d(" << d.a << ")"; break;
    case Kind::flatten: s << "flatten(length_major)"; break;
    case Kind::dense: s << "dense(in=" << d.a << ",out=" << d.b << ")"; break;
    case Kind::softmax: s << "softmax"; break;
  }
  return s.str();
}

}  // namespace

const std::string& canonical_arch_string() {
  static const std::string s = [] {
    std::string out = "coexist-cnn/1;input=1024x2";
    for (const auto& d : canonical_layers()) out += ";" + describe(d);
    return out;
  }();
  return s;
}

ArchHash canonical_arch_hash() {
  const auto digest = sha256(canonical_arch_string());
  ArchHash h{};
  std::copy(digest.begin(), digest.end(), h.begin());
  return h;
}

std::vector<std::pair<std::string, std::vector<std::size_t>>> canonical_tensor_shapes() {
  std::vector<std::pair<std::string, std::vector<std::size_t>>> out;
  for (const auto& d : canonical_layers()) {
    switch (d.kind) {
      case Kind::conv1d:
        out.push_back({d.name + ".weight", {d.b, d.a, kKernel}});
        out.push_back({d.name + ".bias", {d.b}});
        break;
      case Kind::dense:
        out.push_back({d.name + ".weight", {d.b, d.a}});
        out.push_back({d.name + ".bias", {d.b}});
        break;
      case Kind::nonlocal: {
        const std::size_t c = d.a, h = c / 2;
        for (const char* proj : {"theta", "phi", "g"}) {
          out.push_back({d.name + "." + proj + ".weight", {h, c}});
          out.push_back({d.name + "." + proj + ".bias", {h}});
        }
        out.push_back({d.name + ".w_z.weight", {c, h}});
        out.push_back({d.name + ".w_z.bias", {c}});
        break;
      }
      default: break;
    }
  }
  return out;
}

namespace {

using Lookup = std::function<Tensor(const std::string&, const std::vector<std::size_t>&)>;

CnnModel build_canonical(const Lookup& get) {
  CnnModel m;
  m.arch_hash = canonical_arch_hash();
  for (const auto& d : canonical_layers()) {
    const auto t = [&](const std::string& suffix, std::vector<std::size_t> dims) {
      return get(d.name + suffix, dims);
    };
    switch (d.kind) {
      case Kind::conv1d:
        m.layers.push_back({d.name, Conv1d{t(".weight", {d.b, d.a, kKernel}), t(".bias", {d.b}), kPadding}});
        break;
      case Kind::relu: m.layers.push_back({d.name, Relu{}}); break;
      case Kind::nonlocal: {
        const std::size_t c = d.a, h = c / 2;
        m.layers.push_back({d.name, NonLocal{t(".theta.weight", {h, c}), t(".theta.bias", {h}),
                                             t(".phi.weight", {h, c}), t(".phi.bias", {h}),
                                             t(".g.weight", {h, c}), t(".g.bias", {h}),
                                             t(".w_z.weight", {c, h}), t(".w_z.bias", {c})}});
        break;
      }
      case Kind::maxpool1d: m.layers.push_back({d.name, MaxPool1d{d.a}}); break;
      case Kind::flatten: m.layers.push_back({d.name, Flatten{}}); break;
      case Kind::dense:
        m.layers.push_back({d.name, Dense{t(".weight", {d.b, d.a}), t(".bias", {d.b})}});
        break;
      case Kind::softmax: m.layers.push_back({d.name, Softmax{}}); break;
    }
  }
  return m;
}

}  // namespace

CnnModel make_canonical_model(InitKind init, std::uint64_t seed) {
  auto rng = make_rng(seed, {0x696e6974ULL});
  return build_canonical([&](const std::string& name, const std::vector<std::size_t>& dims) {
    Tensor t(dims);
    const bool is_bias = name.ends_with(".bias");
    if (init == InitKind::random && !is_bias) {
      // fan_in = in * k for conv, in for 1x1/dense.
      const std::size_t fan_in = dims.size() == 3 ? dims[1] * dims[2] : dims[1];
      const float bound = static_cast<float>(std::sqrt(6.0 / static_cast<double>(fan_in)));
      std::uniform_real_distribution<float> u(-bound, bound);
      for (auto& v : t.data) v = u(rng);
    }
    return t;
  });
}

CnnModel model_from_tensor_file(const TensorFile& f, bool allow_custom_arch) {
  if (!allow_custom_arch && f.arch_hash != canonical_arch_hash()) {
    throw ShapeError("weights: architecture hash does not match the canonical architecture (" +
                     to_hex(std::string_view(reinterpret_cast<const char*>(f.arch_hash.data()), 32)) +
                     "); pass allow_custom_arch to override");
  }
  std::size_t used = 0;
  CnnModel m = build_canonical([&](const std::string& name, const std::vector<std::size_t>& dims) {
    const Tensor* t = f.find(name);
    if (t == nullptr) throw ShapeError("weights: missing tensor '" + name + "'");
    if (t->dims != dims) {
      throw ShapeError("weights: tensor '" + name + "' has shape " + dims_to_string(t->dims) + ", expected " +
                       dims_to_string(dims));
    }
    if (!t->all_finite()) throw NumericError("weights: tensor '" + name + "' contains NaN/Inf");
    ++used;
    return *t;
  });
  if (used != f.tensors.size()) {
    for (const auto& nt : f.tensors) {
      bool known = false;
      for (const auto& [name, dims] : canonical_tensor_shapes()) known = known || name == nt.name;
      if (!known) throw ShapeError("weights: unexpected tensor '" + nt.name + "'");
    }
    throw ShapeError("weights: duplicate tensor names");
  }
  m.arch_hash = f.arch_hash;
  return m;
}

TensorFile model_to_tensor_file(const CnnModel& model) {
  TensorFile f;
  f.arch_hash = model.arch_hash;
  for (const auto& nl : model.layers) {
    std::visit(overloaded{
                   [&](const Conv1d& c) {
                     f.tensors.push_back({nl.name + ".weight", c.weight});
                     f.tensors.push_back({nl.name + ".bias", c.bias});
                   },
                   [&](const Dense& d) {
                     f.tensors.push_back({nl.name + ".weight", d.weight});
                     f.tensors.push_back({nl.name + ".bias", d.bias});
                   },
                   [&](const NonLocal& n) {
                     f.tensors.push_back({nl.name + ".theta.weight", n.theta_w});
                     f.tensors.push_back({nl.name + ".theta.bias", n.theta_b});
                     f.tensors.push_back({nl.name + ".phi.weight", n.phi_w});
                     f.tensors.push_back({nl.name + ".phi.bias", n.phi_b});
                     f.tensors.push_back({nl.name + ".g.weight", n.g_w});
                     f.tensors.push_back({nl.name + ".g.bias", n.g_b});
                     f.tensors.push_back({nl.name + ".w_z.weight", n.wz_w});
                     f.tensors.push_back({nl.name + ".w_z.bias", n.wz_b});
                   },
                   [](const auto&) {},
               },
               nl.layer);
  }
  return f;
}

CnnModel load_weights(const std::string& path, bool allow_custom_arch) {
  return model_from_tensor_file(read_tensor_file(path), allow_custom_arch);
}

void save_weights(const CnnModel& model, const std::string& path) {
  write_tensor_file(model_to_tensor_file(model), path);
}

std::vector<std::vector<std::size_t>> CnnModel::shape_chain() const {
  std::vector<std::vector<std::size_t>> chain;
  std::vector<std::size_t> s{input_len, input_channels};
  for (const auto& nl : layers) {
    const auto fail = [&](const std::string& msg) { throw ShapeError(nl.name + ": " + msg); };
    std::visit(overloaded{
                   [&](const Conv1d& c) {
                     if (s.size() != 2 || c.in_channels() != s[1]) fail("conv input channel mismatch");
                     if (s[0] + 2 * c.padding < c.kernel()) fail("input shorter than kernel");
                     s = {s[0] + 2 * c.padding - c.kernel() + 1, c.out_channels()};
                   },
                   [&](const Relu&) {},
                   [&](const NonLocal& n) {
                     if (s.size() != 2 || n.channels() != s[1]) fail("nonlocal channel mismatch");
                     if (s[1] % 2 != 0) fail("nonlocal needs an even channel count");
                   },
                   [&](const MaxPool1d& p) {
                     if (s.size() != 2) fail("maxpool needs [L, C]");
                     s = {s[0] / p.size, s[1]};
                   },
                   [&](const Flatten&) { s = {product(s)}; },
                   [&](const Dense& d) {
                     if (s.size() != 1 || d.weight.dim(1) != s[0]) {
                       fail("dense input width " + (s.size() == 1 ? std::to_string(s[0]) : dims_to_string(s)) +
                            " does not match weight " + dims_to_string(d.weight.dims));
                     }
                     s = {d.weight.dim(0)};
                   },
                   [&](const Softmax&) {
                     if (s.size() != 1) fail("softmax needs a flat input");
                   },
               },
               nl.layer);
    chain.push_back(s);
  }
  return chain;
}

namespace {

Tensor apply_layer(const NamedLayer& nl, const Tensor& x) {
  return std::visit(overloaded{
                        [&](const Conv1d& c) { return conv1d_forward(x, c); },
                        [&](const Relu&) { return relu_forward(x); },
                        [&](const NonLocal& n) { return nonlocal_forward(x, n); },
                        [&](const MaxPool1d& p) { return maxpool1d_forward(x, p); },
                        [&](const Flatten&) { return flatten_forward(x); },
                        [&](const Dense& d) { return dense_forward(x, d); },
                        [&](const Softmax&) { return softmax_forward(x); },
                    },
                    nl.layer);
}

void check_input(const CnnModel& model, const Tensor& batch) {
  batch.validate("cnn input");
  if (batch.rank() != 3 || batch.dim(0) < 1 || batch.dim(1) != model.input_len ||
      batch.dim(2) != model.input_channels) {
    throw ShapeError("cnn_forward: expected [b, " + std::to_string(model.input_len) + ", " +
                     std::to_string(model.input_channels) + "] with b >= 1, got " + dims_to_string(batch.dims));
  }
}

template <typename OnLayer>
Tensor run(const CnnModel& model, const Tensor& batch, const ForwardOptions& opts, OnLayer&& on_layer) {
  check_input(model, batch);
  Tensor x = batch;
  for (const auto& nl : model.layers) {
    try {
      x = apply_layer(nl, x);
    } catch (const ShapeError& e) {
      throw ShapeError(nl.name + ": " + e.what());
    }
    if (opts.check_finite && !x.all_finite()) {
      throw NumericError("cnn_forward: non-finite activation after layer '" + nl.name + "'");
    }
    on_layer(nl.name, x);
  }
  return x;
}

}  // namespace

Tensor cnn_forward(const CnnModel& model, const Tensor& batch, const ForwardOptions& opts) {
  return run(model, batch, opts, [](const std::string&, const Tensor&) {});
}

std::vector<NamedTensor> forward_with_activations(const CnnModel& model, const Tensor& batch,
                                                  const ForwardOptions& opts) {
  std::vector<NamedTensor> acts{{"input", batch}};
  run(model, batch, opts, [&](const std::string& name, const Tensor& x) { acts.push_back({name, x}); });
  return acts;
}

TensorFile export_goldens(const CnnModel& model, const Tensor& batch) {
  TensorFile f;
  f.arch_hash = model.arch_hash;
  f.tensors = forward_with_activations(model, batch);
  f.tensors.push_back({"probs", f.tensors.back().tensor});
  return f;
}

std::vector<GoldenDiff> compare_goldens(const CnnModel& model, const TensorFile& goldens) {
  const Tensor* input = goldens.find("input");
  if (input == nullptr) throw ShapeError("goldens: missing 'input' tensor");
  auto acts = forward_with_activations(model, *input);
  acts.push_back({"probs", acts.back().tensor});

  std::vector<GoldenDiff> out;
  for (const auto& g : goldens.tensors) {
    if (g.name == "input") continue;
    const NamedTensor* mine = nullptr;
    for (const auto& a : acts)
      if (a.name == g.name) mine = &a;
    if (mine == nullptr) throw ShapeError("goldens: no layer named '" + g.name + "'");
    if (mine->tensor.dims != g.tensor.dims) {
      throw ShapeError("goldens: '" + g.name + "' has shape " + dims_to_string(g.tensor.dims) + ", model gives " +
                       dims_to_string(mine->tensor.dims));
    }
    double m = 0.0;
    for (std::size_t i = 0; i < g.tensor.numel(); ++i) {
      m = std::max(m, std::abs(static_cast<double>(g.tensor.data[i]) - mine->tensor.data[i]));
    }
    out.push_back({g.name, m});
  }
  return out;
}

}  // namespace coexist::nn
