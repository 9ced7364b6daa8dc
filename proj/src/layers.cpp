#include <algorithm>
#include <cmath>
#include <vector>

#include "coexist/cnn.hpp"
#include "coexist/errors.hpp"

namespace coexist::nn {
namespace {

// Four interleaved partial sums; the order is fixed, so results are
// reproducible for a given length.
inline double dot(const float* a, const float* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += static_cast<double>(a[i]) * b[i];
    s1 += static_cast<double>(a[i + 1]) * b[i + 1];
    s2 += static_cast<double>(a[i + 2]) * b[i + 2];
    s3 += static_cast<double>(a[i + 3]) * b[i + 3];
  }
  for (; i < n; ++i) s0 += static_cast<double>(a[i]) * b[i];
  return (s0 + s1) + (s2 + s3);
}

inline double dot(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

void require_rank(const Tensor& x, std::size_t rank, const char* op) {
  x.validate(op);
  if (x.rank() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + " input, got " +
                     dims_to_string(x.dims));
  }
}

void require_dims(const Tensor& t, std::vector<std::size_t> dims, const std::string& what) {
  if (t.dims != dims) {
    throw ShapeError(what + ": expected " + dims_to_string(dims) + ", got " + dims_to_string(t.dims));
  }
}

// 1x1 projection of every position: out[l][o] = b[o] + sum_c w[o][c] x[l][c].
std::vector<double> project(const float* x, std::size_t len, std::size_t in, const Tensor& w,
                            const Tensor& b) {
  const std::size_t out = w.dim(0);
  std::vector<double> y(len * out);
  for (std::size_t l = 0; l < len; ++l) {
    for (std::size_t o = 0; o < out; ++o) {
      y[l * out + o] = static_cast<double>(b.data[o]) + dot(w.ptr() + o * in, x + l * in, in);
    }
  }
  return y;
}

}  // namespace

Tensor conv1d_forward(const Tensor& x, const Conv1d& conv) {
  require_rank(x, 3, "conv1d");
  if (conv.weight.rank() != 3) throw ShapeError("conv1d: weight must be [out, in, k]");
  const std::size_t batch = x.dim(0), len = x.dim(1), cin = x.dim(2);
  const std::size_t cout = conv.out_channels(), k = conv.kernel(), pad = conv.padding;
  if (conv.in_channels() != cin) {
    throw ShapeError("conv1d: input has " + std::to_string(cin) + " channels, weight expects " +
                     std::to_string(conv.in_channels()));
  }
  require_dims(conv.bias, {cout}, "conv1d bias");
  if (len + 2 * pad < k) throw ShapeError("conv1d: input shorter than kernel");
  const std::size_t lout = len + 2 * pad - k + 1;

  // Repack to [out][k][in] so the inner product runs over contiguous input
  // channels.
  std::vector<float> wr(cout * k * cin);
  for (std::size_t o = 0; o < cout; ++o)
    for (std::size_t c = 0; c < cin; ++c)
      for (std::size_t j = 0; j < k; ++j) wr[(o * k + j) * cin + c] = conv.weight.data[(o * cin + c) * k + j];

  Tensor y({batch, lout, cout});
  for (std::size_t b = 0; b < batch; ++b) {
    const float* xb = x.ptr() + b * len * cin;
    float* yb = y.ptr() + b * lout * cout;
    for (std::size_t l = 0; l < lout; ++l) {
      // Kernel taps that land inside the input.
      const std::size_t j_lo = l < pad ? pad - l : 0;
      const std::size_t j_hi = std::min(k, len + pad - l);
      for (std::size_t o = 0; o < cout; ++o) {
        double acc = conv.bias.data[o];
        for (std::size_t j = j_lo; j < j_hi; ++j) {
          acc += dot(wr.data() + (o * k + j) * cin, xb + (l + j - pad) * cin, cin);
        }
        yb[l * cout + o] = static_cast<float>(acc);
      }
    }
  }
  return y;
}

Tensor relu_forward(const Tensor& x) {
  x.validate("relu");
  Tensor y = x;
  for (auto& v : y.data) v = v > 0.0f ? v : 0.0f;
  return y;
}

Tensor maxpool1d_forward(const Tensor& x, const MaxPool1d& pool) {
  require_rank(x, 3, "maxpool1d");
  if (pool.size == 0) throw ShapeError("maxpool1d: size must be >= 1");
  const std::size_t batch = x.dim(0), len = x.dim(1), ch = x.dim(2);
  const std::size_t lout = len / pool.size;
  Tensor y({batch, lout, ch});
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t l = 0; l < lout; ++l) {
      for (std::size_t c = 0; c < ch; ++c) {
        float m = x.data[(b * len + l * pool.size) * ch + c];
        for (std::size_t j = 1; j < pool.size; ++j) m = std::max(m, x.data[(b * len + l * pool.size + j) * ch + c]);
        y.data[(b * lout + l) * ch + c] = m;
      }
    }
  }
  return y;
}

Tensor flatten_forward(const Tensor& x) {
  x.validate("flatten");
  if (x.rank() < 2) throw ShapeError("flatten: need rank >= 2");
  Tensor y = x;
  y.dims = {x.dim(0), x.numel() / std::max<std::size_t>(x.dim(0), 1)};
  return y;
}

Tensor dense_forward(const Tensor& x, const Dense& dense) {
  require_rank(x, 2, "dense");
  if (dense.weight.rank() != 2) throw ShapeError("dense: weight must be [out, in]");
  const std::size_t batch = x.dim(0), in = x.dim(1), out = dense.weight.dim(0);
  if (dense.weight.dim(1) != in) {
    throw ShapeError("dense: input width " + std::to_string(in) + ", weight expects " +
                     std::to_string(dense.weight.dim(1)));
  }
  require_dims(dense.bias, {out}, "dense bias");
  Tensor y({batch, out});
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t o = 0; o < out; ++o) {
      y.data[b * out + o] = static_cast<float>(static_cast<double>(dense.bias.data[o]) +
                                               dot(dense.weight.ptr() + o * in, x.ptr() + b * in, in));
    }
  }
  return y;
}

Tensor softmax_forward(const Tensor& x) {
  require_rank(x, 2, "softmax");
  const std::size_t batch = x.dim(0), n = x.dim(1);
  Tensor y(x.dims);
  for (std::size_t b = 0; b < batch; ++b) {
    const float* row = x.ptr() + b * n;
    const double m = *std::max_element(row, row + n);
    double s = 0.0;
    std::vector<double> e(n);
    for (std::size_t i = 0; i < n; ++i) s += (e[i] = std::exp(row[i] - m));
    for (std::size_t i = 0; i < n; ++i) y.data[b * n + i] = static_cast<float>(e[i] / s);
  }
  return y;
}

Tensor nonlocal_forward(const Tensor& x, const NonLocal& p) {
  require_rank(x, 3, "nonlocal");
  const std::size_t batch = x.dim(0), len = x.dim(1), ch = x.dim(2);
  if (ch % 2 != 0) throw ConfigError("nonlocal: channel count " + std::to_string(ch) + " is odd");
  const std::size_t half = ch / 2;
  require_dims(p.theta_w, {half, ch}, "nonlocal theta weight");
  require_dims(p.phi_w, {half, ch}, "nonlocal phi weight");
  require_dims(p.g_w, {half, ch}, "nonlocal g weight");
  require_dims(p.wz_w, {ch, half}, "nonlocal w_z weight");
  require_dims(p.theta_b, {half}, "nonlocal theta bias");
  require_dims(p.phi_b, {half}, "nonlocal phi bias");
  require_dims(p.g_b, {half}, "nonlocal g bias");
  require_dims(p.wz_b, {ch}, "nonlocal w_z bias");

  // W_z as double for the output projection.
  std::vector<double> wz(p.wz_w.data.begin(), p.wz_w.data.end());

  Tensor out(x.dims);
  std::vector<double> logits(len);
  std::vector<double> y(half);
  for (std::size_t b = 0; b < batch; ++b) {
    const float* xb = x.ptr() + b * len * ch;
    const auto theta = project(xb, len, ch, p.theta_w, p.theta_b);
    const auto phi = project(xb, len, ch, p.phi_w, p.phi_b);
    const auto g = project(xb, len, ch, p.g_w, p.g_b);
    for (std::size_t i = 0; i < len; ++i) {
      double m = -INFINITY;
      for (std::size_t j = 0; j < len; ++j) {
        logits[j] = dot(theta.data() + i * half, phi.data() + j * half, half);
        m = std::max(m, logits[j]);
      }
      double s = 0.0;
      std::fill(y.begin(), y.end(), 0.0);
      for (std::size_t j = 0; j < len; ++j) {
        const double a = std::exp(logits[j] - m);
        s += a;
        const double* gj = g.data() + j * half;
        for (std::size_t c = 0; c < half; ++c) y[c] += a * gj[c];
      }
      for (auto& v : y) v /= s;
      for (std::size_t c = 0; c < ch; ++c) {
        const double z = static_cast<double>(p.wz_b.data[c]) + dot(wz.data() + c * half, y.data(), half);
        out.data[(b * len + i) * ch + c] = static_cast<float>(static_cast<double>(xb[i * ch + c]) + z);
      }
    }
  }
  return out;
}

Tensor nonlocal_attention(const Tensor& x, const NonLocal& p) {
  require_rank(x, 3, "nonlocal");
  const std::size_t batch = x.dim(0), len = x.dim(1), ch = x.dim(2);
  if (ch % 2 != 0) throw ConfigError("nonlocal: channel count " + std::to_string(ch) + " is odd");
  const std::size_t half = ch / 2;
  require_dims(p.theta_w, {half, ch}, "nonlocal theta weight");
  require_dims(p.phi_w, {half, ch}, "nonlocal phi weight");
  Tensor a({batch, len, len});
  std::vector<double> logits(len);
  for (std::size_t b = 0; b < batch; ++b) {
    const float* xb = x.ptr() + b * len * ch;
    const auto theta = project(xb, len, ch, p.theta_w, p.theta_b);
    const auto phi = project(xb, len, ch, p.phi_w, p.phi_b);
    for (std::size_t i = 0; i < len; ++i) {
      double m = -INFINITY;
      for (std::size_t j = 0; j < len; ++j) {
        logits[j] = dot(theta.data() + i * half, phi.data() + j * half, half);
        m = std::max(m, logits[j]);
      }
      double s = 0.0;
      for (auto& v : logits) s += (v = std::exp(v - m));
      for (std::size_t j = 0; j < len; ++j) a.data[(b * len + i) * len + j] = static_cast<float>(logits[j] / s);
    }
  }
  return a;
}

}  // namespace coexist::nn
