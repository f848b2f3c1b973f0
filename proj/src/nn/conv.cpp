#include "cloudfill/nn/conv.hpp"

#include <cmath>

#include "cloudfill/core/errors.hpp"
#include "cloudfill/kernels/kernels.hpp"

namespace cloudfill::nn {

std::size_t Conv2d::out_dim(std::size_t in, std::size_t k, std::size_t stride,
                            std::size_t pad) {
  if (in + 2 * pad < k) throw ConfigError("conv kernel larger than padded input");
  return (in + 2 * pad - k) / stride + 1;
}

void Conv2d::init(std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
                  std::size_t stride_, std::size_t pad_, const std::string& name,
                  Rng& rng) {
  in_c = in_channels;
  out_c = out_channels;
  k = kernel;
  stride = stride_;
  pad = pad_;
  W.init(name + ".weight", {out_c, in_c * k * k});
  b.init(name + ".bias", {out_c});
  const double fan_in = static_cast<double>(in_c * k * k);
  const double fan_out = static_cast<double>(out_c * k * k);
  const double bound = std::sqrt(6.0 / (fan_in + fan_out));
  for (std::size_t i = 0; i < W.w.numel(); ++i) W.w[i] = rng.uniform(-bound, bound);
}

namespace {

void im2col(const Tensor& x, std::size_t c, std::size_t h, std::size_t w,
            std::size_t k, std::size_t stride, std::size_t pad, std::size_t oh,
            std::size_t ow, Tensor& col) {
  const std::size_t n = oh * ow;
  for (std::size_t ci = 0; ci < c; ++ci) {
    const double* plane = x.data() + ci * h * w;
    for (std::size_t ki = 0; ki < k; ++ki) {
      for (std::size_t kj = 0; kj < k; ++kj) {
        double* dst = col.data() + ((ci * k + ki) * k + kj) * n;
        for (std::size_t oi = 0; oi < oh; ++oi) {
          const std::ptrdiff_t r =
              static_cast<std::ptrdiff_t>(oi * stride + ki) - static_cast<std::ptrdiff_t>(pad);
          for (std::size_t oj = 0; oj < ow; ++oj) {
            const std::ptrdiff_t cc =
                static_cast<std::ptrdiff_t>(oj * stride + kj) - static_cast<std::ptrdiff_t>(pad);
            double v = 0.0;
            if (r >= 0 && r < static_cast<std::ptrdiff_t>(h) && cc >= 0 &&
                cc < static_cast<std::ptrdiff_t>(w)) {
              v = plane[static_cast<std::size_t>(r) * w + static_cast<std::size_t>(cc)];
            }
            dst[oi * ow + oj] = v;
          }
        }
      }
    }
  }
}

void col2im(const Tensor& col, std::size_t c, std::size_t h, std::size_t w,
            std::size_t k, std::size_t stride, std::size_t pad, std::size_t oh,
            std::size_t ow, Tensor& x) {
  const std::size_t n = oh * ow;
  x.zero();
  for (std::size_t ci = 0; ci < c; ++ci) {
    double* plane = x.data() + ci * h * w;
    for (std::size_t ki = 0; ki < k; ++ki) {
      for (std::size_t kj = 0; kj < k; ++kj) {
        const double* src = col.data() + ((ci * k + ki) * k + kj) * n;
        for (std::size_t oi = 0; oi < oh; ++oi) {
          const std::ptrdiff_t r =
              static_cast<std::ptrdiff_t>(oi * stride + ki) - static_cast<std::ptrdiff_t>(pad);
          if (r < 0 || r >= static_cast<std::ptrdiff_t>(h)) continue;
          for (std::size_t oj = 0; oj < ow; ++oj) {
            const std::ptrdiff_t cc =
                static_cast<std::ptrdiff_t>(oj * stride + kj) - static_cast<std::ptrdiff_t>(pad);
            if (cc < 0 || cc >= static_cast<std::ptrdiff_t>(w)) continue;
            plane[static_cast<std::size_t>(r) * w + static_cast<std::size_t>(cc)] +=
                src[oi * ow + oj];
          }
        }
      }
    }
  }
}

}  // namespace

Tensor Conv2d::forward(const Tensor& x) {
  if (x.ndim() != 3 || x.dim(0) != in_c) {
    throw DataError("conv input channel mismatch");
  }
  h_ = x.dim(1);
  w_ = x.dim(2);
  oh_ = out_dim(h_, k, stride, pad);
  ow_ = out_dim(w_, k, stride, pad);
  const std::size_t n = oh_ * ow_;
  col_ = Tensor({in_c * k * k, n});
  im2col(x, in_c, h_, w_, k, stride, pad, oh_, ow_, col_);

  Tensor y({out_c, oh_, ow_});
  kern::active().matmul(W.w.data(), col_.data(), y.data(), out_c, in_c * k * k, n, false);
  for (std::size_t co = 0; co < out_c; ++co) {
    double* row = y.data() + co * n;
    const double bias = b.w[co];
    for (std::size_t i = 0; i < n; ++i) row[i] += bias;
  }
  return y;
}

Tensor Conv2d::backward(const Tensor& dy) {
  const std::size_t n = oh_ * ow_;
  // dW += dy col^T ; db += per-channel sums ; dx = col2im(W^T dy)
  kern::active().matmul_abt(dy.data(), col_.data(), W.g.data(), out_c, n,
                            in_c * k * k, true);
  for (std::size_t co = 0; co < out_c; ++co) {
    b.g[co] += kern::active().sum(dy.data() + co * n, n);
  }
  Tensor dcol({in_c * k * k, n});
  kern::active().matmul_atb(W.w.data(), dy.data(), dcol.data(), in_c * k * k, out_c,
                            n, false);
  Tensor dx({in_c, h_, w_});
  col2im(dcol, in_c, h_, w_, k, stride, pad, oh_, ow_, dx);
  return dx;
}

ParamRefs Conv2d::params() { return {&W, &b}; }

Tensor LeakyRelu::forward(const Tensor& x) {
  x_ = x;
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.numel(); ++i) {
    y[i] = x[i] > 0.0 ? x[i] : slope * x[i];
  }
  return y;
}

Tensor LeakyRelu::backward(const Tensor& dy) {
  Tensor dx(x_.shape());
  for (std::size_t i = 0; i < x_.numel(); ++i) {
    dx[i] = x_[i] > 0.0 ? dy[i] : slope * dy[i];
  }
  return dx;
}

Tensor AvgPool2::forward(const Tensor& x) {
  c_ = x.dim(0);
  h_ = x.dim(1);
  w_ = x.dim(2);
  return avg_pool2(x);
}

Tensor AvgPool2::backward(const Tensor& dy) {
  Tensor dx({c_, h_, w_});
  const std::size_t oh = h_ / 2, ow = w_ / 2;
  for (std::size_t c = 0; c < c_; ++c) {
    for (std::size_t r = 0; r < oh; ++r) {
      for (std::size_t j = 0; j < ow; ++j) {
        const double g = dy[(c * oh + r) * ow + j] * 0.25;
        dx[(c * h_ + 2 * r) * w_ + 2 * j] = g;
        dx[(c * h_ + 2 * r) * w_ + 2 * j + 1] = g;
        dx[(c * h_ + 2 * r + 1) * w_ + 2 * j] = g;
        dx[(c * h_ + 2 * r + 1) * w_ + 2 * j + 1] = g;
      }
    }
  }
  return dx;
}

Tensor NearestUp2::forward(const Tensor& x) {
  c_ = x.dim(0);
  h_ = x.dim(1);
  w_ = x.dim(2);
  Tensor y({c_, 2 * h_, 2 * w_});
  for (std::size_t c = 0; c < c_; ++c) {
    for (std::size_t r = 0; r < h_; ++r) {
      for (std::size_t j = 0; j < w_; ++j) {
        const double v = x[(c * h_ + r) * w_ + j];
        y[(c * 2 * h_ + 2 * r) * 2 * w_ + 2 * j] = v;
        y[(c * 2 * h_ + 2 * r) * 2 * w_ + 2 * j + 1] = v;
        y[(c * 2 * h_ + 2 * r + 1) * 2 * w_ + 2 * j] = v;
        y[(c * 2 * h_ + 2 * r + 1) * 2 * w_ + 2 * j + 1] = v;
      }
    }
  }
  return y;
}

Tensor NearestUp2::backward(const Tensor& dy) {
  Tensor dx({c_, h_, w_});
  for (std::size_t c = 0; c < c_; ++c) {
    for (std::size_t r = 0; r < h_; ++r) {
      for (std::size_t j = 0; j < w_; ++j) {
        dx[(c * h_ + r) * w_ + j] =
            dy[(c * 2 * h_ + 2 * r) * 2 * w_ + 2 * j] +
            dy[(c * 2 * h_ + 2 * r) * 2 * w_ + 2 * j + 1] +
            dy[(c * 2 * h_ + 2 * r + 1) * 2 * w_ + 2 * j] +
            dy[(c * 2 * h_ + 2 * r + 1) * 2 * w_ + 2 * j + 1];
      }
    }
  }
  return dx;
}

Tensor avg_pool2_backward(const Tensor& dy, std::size_t h, std::size_t w) {
  const std::size_t c = dy.dim(0), oh = dy.dim(1), ow = dy.dim(2);
  if (oh * 2 != h || ow * 2 != w) throw DataError("avg_pool2_backward dims mismatch");
  Tensor dx({c, h, w});
  for (std::size_t ci = 0; ci < c; ++ci) {
    for (std::size_t r = 0; r < oh; ++r) {
      for (std::size_t j = 0; j < ow; ++j) {
        const double g = dy[(ci * oh + r) * ow + j] * 0.25;
        dx[(ci * h + 2 * r) * w + 2 * j] = g;
        dx[(ci * h + 2 * r) * w + 2 * j + 1] = g;
        dx[(ci * h + 2 * r + 1) * w + 2 * j] = g;
        dx[(ci * h + 2 * r + 1) * w + 2 * j + 1] = g;
      }
    }
  }
  return dx;
}

Tensor avg_pool2(const Tensor& x) {
  const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
  if (h % 2 != 0 || w % 2 != 0) throw DataError("avg_pool2 requires even dims");
  const std::size_t oh = h / 2, ow = w / 2;
  Tensor y({c, oh, ow});
  for (std::size_t ci = 0; ci < c; ++ci) {
    for (std::size_t r = 0; r < oh; ++r) {
      for (std::size_t j = 0; j < ow; ++j) {
        y[(ci * oh + r) * ow + j] =
            0.25 * (x[(ci * h + 2 * r) * w + 2 * j] + x[(ci * h + 2 * r) * w + 2 * j + 1] +
                    x[(ci * h + 2 * r + 1) * w + 2 * j] +
                    x[(ci * h + 2 * r + 1) * w + 2 * j + 1]);
      }
    }
  }
  return y;
}

}  // namespace cloudfill::nn
