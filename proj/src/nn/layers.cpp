#include "cloudfill/nn/layers.hpp"

#include <cmath>

#include "cloudfill/core/errors.hpp"
#include "cloudfill/kernels/kernels.hpp"

namespace cloudfill::nn {

namespace {

constexpr double kInvSqrt2 = 0.7071067811865476;
constexpr double kInvSqrt2Pi = 0.3989422804014327;

void xavier_init(Tensor& w, std::size_t in, std::size_t out, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
  for (std::size_t i = 0; i < w.numel(); ++i) w[i] = rng.uniform(-bound, bound);
}

}  // namespace

void add_inplace(Tensor& dst, const Tensor& src) {
  kern::active().axpy(1.0, src.data(), dst.data(), dst.numel());
}

// ---------------------------------------------------------------------------
// Linear
// ---------------------------------------------------------------------------

void Linear::init(std::size_t in, std::size_t out, const std::string& name, Rng& rng) {
  W.init(name + ".weight", {in, out});
  b.init(name + ".bias", {out});
  xavier_init(W.w, in, out, rng);
}

Tensor Linear::forward(const Tensor& x) {
  x_ = x;
  const std::size_t s = x.rows(), in = x.cols(), out = W.w.cols();
  Tensor y({s, out});
  kern::active().matmul(x.data(), W.w.data(), y.data(), s, in, out, false);
  for (std::size_t r = 0; r < s; ++r) {
    kern::active().axpy(1.0, b.w.data(), y.data() + r * out, out);
  }
  return y;
}

Tensor Linear::backward(const Tensor& dy) {
  const std::size_t s = x_.rows(), in = x_.cols(), out = W.w.cols();
  // dW += x^T dy ; db += column sums of dy ; dx = dy W^T
  kern::active().matmul_atb(x_.data(), dy.data(), W.g.data(), in, s, out, true);
  for (std::size_t r = 0; r < s; ++r) {
    kern::active().axpy(1.0, dy.data() + r * out, b.g.data(), out);
  }
  Tensor dx({s, in});
  kern::active().matmul_abt(dy.data(), W.w.data(), dx.data(), s, out, in, false);
  return dx;
}

ParamRefs Linear::params() { return {&W, &b}; }

// ---------------------------------------------------------------------------
// LayerNorm
// ---------------------------------------------------------------------------

void LayerNorm::init(std::size_t dim, const std::string& name) {
  gamma.init(name + ".gamma", {dim});
  beta.init(name + ".beta", {dim});
  gamma.w.fill(1.0);
}

Tensor LayerNorm::forward(const Tensor& x) {
  const std::size_t s = x.rows(), d = x.cols();
  xhat_ = Tensor({s, d});
  rstd_.assign(s, 0.0);
  Tensor y({s, d});
  for (std::size_t r = 0; r < s; ++r) {
    const double* xr = x.data() + r * d;
    double mean = 0.0;
    for (std::size_t j = 0; j < d; ++j) mean += xr[j];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double c = xr[j] - mean;
      var += c * c;
    }
    var /= static_cast<double>(d);
    const double rstd = 1.0 / std::sqrt(var + eps);
    rstd_[r] = rstd;
    for (std::size_t j = 0; j < d; ++j) {
      const double xh = (xr[j] - mean) * rstd;
      xhat_.at(r, j) = xh;
      y.at(r, j) = xh * gamma.w[j] + beta.w[j];
    }
  }
  return y;
}

Tensor LayerNorm::backward(const Tensor& dy) {
  const std::size_t s = dy.rows(), d = dy.cols();
  Tensor dx({s, d});
  for (std::size_t r = 0; r < s; ++r) {
    const double* dyr = dy.data() + r * d;
    double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double xh = xhat_.at(r, j);
      const double dxh = dyr[j] * gamma.w[j];
      gamma.g[j] += dyr[j] * xh;
      beta.g[j] += dyr[j];
      sum_dxhat += dxh;
      sum_dxhat_xhat += dxh * xh;
    }
    const double inv_d = 1.0 / static_cast<double>(d);
    for (std::size_t j = 0; j < d; ++j) {
      const double xh = xhat_.at(r, j);
      const double dxh = dyr[j] * gamma.w[j];
      dx.at(r, j) = rstd_[r] * (dxh - inv_d * sum_dxhat - xh * inv_d * sum_dxhat_xhat);
    }
  }
  return dx;
}

ParamRefs LayerNorm::params() { return {&gamma, &beta}; }

// ---------------------------------------------------------------------------
// Gelu (exact erf form)
// ---------------------------------------------------------------------------

Tensor Gelu::forward(const Tensor& x) {
  x_ = x;
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.numel(); ++i) {
    y[i] = 0.5 * x[i] * (1.0 + std::erf(x[i] * kInvSqrt2));
  }
  return y;
}

Tensor Gelu::backward(const Tensor& dy) {
  Tensor dx(x_.shape());
  for (std::size_t i = 0; i < x_.numel(); ++i) {
    const double x = x_[i];
    const double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
    const double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
    dx[i] = dy[i] * (cdf + x * pdf);
  }
  return dx;
}

// ---------------------------------------------------------------------------
// MultiHeadAttention
// ---------------------------------------------------------------------------

void MultiHeadAttention::init(std::size_t d, std::size_t h, const std::string& name,
                              Rng& rng) {
  if (h == 0 || d % h != 0) {
    throw ConfigError("attention dim must divide by heads");
  }
  dim = d;
  heads = h;
  head_dim = d / h;
  qkv.init(d, 3 * d, name + ".qkv", rng);
  proj.init(d, d, name + ".proj", rng);
}

namespace {

// copy head column block [S x dh] out of a [S x stride] matrix
void gather_head(const Tensor& src, std::size_t col0, std::size_t dh, Tensor& dst) {
  const std::size_t s = src.rows(), stride = src.cols();
  for (std::size_t r = 0; r < s; ++r) {
    const double* p = src.data() + r * stride + col0;
    double* q = dst.data() + r * dh;
    for (std::size_t j = 0; j < dh; ++j) q[j] = p[j];
  }
}

void scatter_head_add(const Tensor& src, std::size_t col0, std::size_t dh, Tensor& dst) {
  const std::size_t s = dst.rows(), stride = dst.cols();
  for (std::size_t r = 0; r < s; ++r) {
    const double* p = src.data() + r * dh;
    double* q = dst.data() + r * stride + col0;
    for (std::size_t j = 0; j < dh; ++j) q[j] += p[j];
  }
}

}  // namespace

Tensor MultiHeadAttention::forward(const Tensor& x) {
  const std::size_t s = x.rows();
  qkv_out_ = qkv.forward(x);  // [S, 3*dim]
  probs_.assign(heads, Tensor());
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));

  Tensor concat({s, dim});
  Tensor qh({s, head_dim}), kh({s, head_dim}), vh({s, head_dim});
  for (std::size_t h = 0; h < heads; ++h) {
    gather_head(qkv_out_, h * head_dim, head_dim, qh);
    gather_head(qkv_out_, dim + h * head_dim, head_dim, kh);
    gather_head(qkv_out_, 2 * dim + h * head_dim, head_dim, vh);

    Tensor scores({s, s});
    kern::active().matmul_abt(qh.data(), kh.data(), scores.data(), s, head_dim, s, false);
    kern::active().scal(scale, scores.data(), scores.numel());

    // softmax per row
    for (std::size_t r = 0; r < s; ++r) {
      double* row = scores.data() + r * s;
      double mx = row[0];
      for (std::size_t j = 1; j < s; ++j) mx = std::max(mx, row[j]);
      double z = 0.0;
      for (std::size_t j = 0; j < s; ++j) {
        row[j] = std::exp(row[j] - mx);
        z += row[j];
      }
      const double inv = 1.0 / z;
      for (std::size_t j = 0; j < s; ++j) row[j] *= inv;
    }
    probs_[h] = scores;

    Tensor out_h({s, head_dim});
    kern::active().matmul(scores.data(), vh.data(), out_h.data(), s, s, head_dim, false);
    for (std::size_t r = 0; r < s; ++r) {
      double* q = concat.data() + r * dim + h * head_dim;
      const double* p = out_h.data() + r * head_dim;
      for (std::size_t j = 0; j < head_dim; ++j) q[j] = p[j];
    }
  }
  return proj.forward(concat);
}

Tensor MultiHeadAttention::backward(const Tensor& dy) {
  const std::size_t s = dy.rows();
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
  Tensor dconcat = proj.backward(dy);  // [S, dim]

  Tensor dqkv({s, 3 * dim});
  Tensor qh({s, head_dim}), kh({s, head_dim}), vh({s, head_dim});
  Tensor dout_h({s, head_dim});
  for (std::size_t h = 0; h < heads; ++h) {
    gather_head(qkv_out_, h * head_dim, head_dim, qh);
    gather_head(qkv_out_, dim + h * head_dim, head_dim, kh);
    gather_head(qkv_out_, 2 * dim + h * head_dim, head_dim, vh);
    gather_head(dconcat, h * head_dim, head_dim, dout_h);

    const Tensor& p = probs_[h];

    // dV = P^T dout ; dP = dout V^T
    Tensor dvh({s, head_dim});
    kern::active().matmul_atb(p.data(), dout_h.data(), dvh.data(), s, s, head_dim, false);
    Tensor dp({s, s});
    kern::active().matmul_abt(dout_h.data(), vh.data(), dp.data(), s, head_dim, s, false);

    // softmax backward, then the score scale
    Tensor ds({s, s});
    for (std::size_t r = 0; r < s; ++r) {
      const double* pr = p.data() + r * s;
      const double* dpr = dp.data() + r * s;
      double inner = 0.0;
      for (std::size_t j = 0; j < s; ++j) inner += pr[j] * dpr[j];
      double* dsr = ds.data() + r * s;
      for (std::size_t j = 0; j < s; ++j) dsr[j] = scale * pr[j] * (dpr[j] - inner);
    }

    // dQ = ds K ; dK = ds^T Q
    Tensor dqh({s, head_dim});
    kern::active().matmul(ds.data(), kh.data(), dqh.data(), s, s, head_dim, false);
    Tensor dkh({s, head_dim});
    kern::active().matmul_atb(ds.data(), qh.data(), dkh.data(), s, s, head_dim, false);

    scatter_head_add(dqh, h * head_dim, head_dim, dqkv);
    scatter_head_add(dkh, dim + h * head_dim, head_dim, dqkv);
    scatter_head_add(dvh, 2 * dim + h * head_dim, head_dim, dqkv);
  }
  return qkv.backward(dqkv);
}

ParamRefs MultiHeadAttention::params() {
  ParamRefs p = qkv.params();
  append(p, proj.params());
  return p;
}

// ---------------------------------------------------------------------------
// TransformerBlock
// ---------------------------------------------------------------------------

void TransformerBlock::init(std::size_t dim, std::size_t heads, std::size_t hidden,
                            const std::string& name, Rng& rng) {
  ln1.init(dim, name + ".ln1");
  ln2.init(dim, name + ".ln2");
  attn.init(dim, heads, name + ".attn", rng);
  fc1.init(dim, hidden, name + ".fc1", rng);
  fc2.init(hidden, dim, name + ".fc2", rng);
}

Tensor TransformerBlock::forward(const Tensor& x) {
  Tensor x1 = attn.forward(ln1.forward(x));
  add_inplace(x1, x);
  Tensor y = fc2.forward(act.forward(fc1.forward(ln2.forward(x1))));
  add_inplace(y, x1);
  return y;
}

Tensor TransformerBlock::backward(const Tensor& dy) {
  Tensor dx1 = ln2.backward(fc1.backward(act.backward(fc2.backward(dy))));
  add_inplace(dx1, dy);
  Tensor dx = ln1.backward(attn.backward(dx1));
  add_inplace(dx, dx1);
  return dx;
}

ParamRefs TransformerBlock::params() {
  ParamRefs p = ln1.params();
  append(p, attn.params());
  append(p, ln2.params());
  append(p, fc1.params());
  append(p, fc2.params());
  return p;
}

}  // namespace cloudfill::nn
