#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "coexist/tensor.hpp"
#include "coexist/tensor_file.hpp"

namespace coexist::nn {

// Activations are [batch, length, channels] row-major. Weight layouts follow
// the usual framework conventions so a trainer can export them directly:
// conv [out, in, kernel], 1x1 projections and dense [out, in].

struct Conv1d {
  Tensor weight;  // [out, in, k]
  Tensor bias;    // [out]
  std::size_t padding = 1;

  std::size_t in_channels() const { return weight.dim(1); }
  std::size_t out_channels() const { return weight.dim(0); }
  std::size_t kernel() const { return weight.dim(2); }
};

struct Relu {};

/// Embedded-Gaussian non-local block with a C/2 bottleneck.
struct NonLocal {
  Tensor theta_w, theta_b;  // [C/2, C], [C/2]
  Tensor phi_w, phi_b;
  Tensor g_w, g_b;
  Tensor wz_w, wz_b;  // [C, C/2], [C]

  std::size_t channels() const { return wz_w.dim(0); }
};

struct MaxPool1d {
  std::size_t size = 2;
};

struct Flatten {};

struct Dense {
  Tensor weight;  // [out, in]
  Tensor bias;    // [out]
};

struct Softmax {};

using Layer = std::variant<Conv1d, Relu, NonLocal, MaxPool1d, Flatten, Dense, Softmax>;

struct NamedLayer {
  std::string name;  // e.g. "block1.conv1", "head.dense1"
  Layer layer;
};

/// Immutable after construction; forward passes are reentrant.
struct CnnModel {
  std::vector<NamedLayer> layers;
  std::size_t input_len = 1024;
  std::size_t input_channels = 2;
  ArchHash arch_hash{};

  /// Shape after every layer for a single batch row, checked for
  /// compatibility. Throws ShapeError naming the first bad layer.
  std::vector<std::vector<std::size_t>> shape_chain() const;
};

// Layer kernels. Each accumulates dot products in double.
Tensor conv1d_forward(const Tensor& x, const Conv1d& conv);
Tensor relu_forward(const Tensor& x);
Tensor maxpool1d_forward(const Tensor& x, const MaxPool1d& pool);
Tensor flatten_forward(const Tensor& x);
Tensor dense_forward(const Tensor& x, const Dense& dense);
Tensor softmax_forward(const Tensor& x);

/// out = x + W_z(softmax_j(theta(x_i) . phi(x_j)) g(x)), per batch row.
Tensor nonlocal_forward(const Tensor& x, const NonLocal& params);

/// Attention weights of the block, [b, L, L]; each row is a softmax.
Tensor nonlocal_attention(const Tensor& x, const NonLocal& params);

struct ForwardOptions {
#ifdef NDEBUG
  bool check_finite = false;
#else
  bool check_finite = true;
#endif
};

/// [b, 1024, 2] -> [b, 2] class probabilities; column 1 is P(radar).
Tensor cnn_forward(const CnnModel& model, const Tensor& batch, const ForwardOptions& opts = {});

/// Output of every named layer (in order), plus "input".
std::vector<NamedTensor> forward_with_activations(const CnnModel& model, const Tensor& batch,
                                                  const ForwardOptions& opts = {});

// Canonical architecture.

/// Text whose SHA-256 is the architecture hash stored in .cnw files.
const std::string& canonical_arch_string();
ArchHash canonical_arch_hash();

/// Tensor name -> expected dims, in file order.
std::vector<std::pair<std::string, std::vector<std::size_t>>> canonical_tensor_shapes();

enum class InitKind { zeros, random };

/// Canonical model with zero or random (He-uniform, seeded) weights.
CnnModel make_canonical_model(InitKind init, std::uint64_t seed = 0);

CnnModel model_from_tensor_file(const TensorFile& f, bool allow_custom_arch = false);
TensorFile model_to_tensor_file(const CnnModel& model);

CnnModel load_weights(const std::string& path, bool allow_custom_arch = false);
void save_weights(const CnnModel& model, const std::string& path);

/// Per-tensor max abs difference between a golden activation file and this
/// model's activations on the golden "input" tensor.
struct GoldenDiff {
  std::string name;
  double max_abs_diff;
};
std::vector<GoldenDiff> compare_goldens(const CnnModel& model, const TensorFile& goldens);

/// Golden file for `batch`: "input", every layer output, and "probs".
TensorFile export_goldens(const CnnModel& model, const Tensor& batch);

}  // namespace coexist::nn
