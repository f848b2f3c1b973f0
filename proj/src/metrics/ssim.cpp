#include "cloudfill/metrics/ssim.hpp"

#include <cmath>
#include <vector>

#include "cloudfill/core/errors.hpp"

namespace cloudfill::metrics {

namespace {

constexpr std::size_t kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;  // (K1 * L)^2, L = 1
constexpr double kC2 = 0.03 * 0.03;

const std::vector<double>& gaussian_taps() {
  static const std::vector<double> taps = [] {
    std::vector<double> t(kWindow);
    double sum = 0.0;
    for (std::size_t i = 0; i < kWindow; ++i) {
      const double d = static_cast<double>(i) - (kWindow - 1) / 2.0;
      t[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
      sum += t[i];
    }
    for (double& v : t) v /= sum;
    return t;
  }();
  return taps;
}

// separable valid-mode Gaussian filter: [h x w] -> [h-10 x w-10]
std::vector<double> blur_valid(const std::vector<double>& img, std::size_t h,
                               std::size_t w) {
  const auto& g = gaussian_taps();
  const std::size_t ow = w - kWindow + 1;
  std::vector<double> tmp(h * ow);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < ow; ++c) {
      double s = 0.0;
      for (std::size_t k = 0; k < kWindow; ++k) s += g[k] * img[r * w + c + k];
      tmp[r * ow + c] = s;
    }
  }
  const std::size_t oh = h - kWindow + 1;
  std::vector<double> out(oh * ow);
  for (std::size_t r = 0; r < oh; ++r) {
    for (std::size_t c = 0; c < ow; ++c) {
      double s = 0.0;
      for (std::size_t k = 0; k < kWindow; ++k) s += g[k] * tmp[(r + k) * ow + c];
      out[r * ow + c] = s;
    }
  }
  return out;
}

}  // namespace

double ssim_plane(const double* x, const double* y, std::size_t h, std::size_t w) {
  if (h < kWindow || w < kWindow) {
    throw DataError("ssim plane smaller than the 11x11 window");
  }
  const std::size_t n = h * w;
  std::vector<double> xv(x, x + n), yv(y, y + n), xx(n), yy(n), xy(n);
  for (std::size_t i = 0; i < n; ++i) {
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const std::vector<double> mx = blur_valid(xv, h, w);
  const std::vector<double> my = blur_valid(yv, h, w);
  const std::vector<double> mxx = blur_valid(xx, h, w);
  const std::vector<double> myy = blur_valid(yy, h, w);
  const std::vector<double> mxy = blur_valid(xy, h, w);

  double acc = 0.0;
  for (std::size_t i = 0; i < mx.size(); ++i) {
    const double mu_x = mx[i], mu_y = my[i];
    const double var_x = mxx[i] - mu_x * mu_x;
    const double var_y = myy[i] - mu_y * mu_y;
    const double cov = mxy[i] - mu_x * mu_y;
    const double num = (2.0 * mu_x * mu_y + kC1) * (2.0 * cov + kC2);
    const double den = (mu_x * mu_x + mu_y * mu_y + kC1) * (var_x + var_y + kC2);
    acc += num / den;
  }
  return acc / static_cast<double>(mx.size());
}

double ssim(const Tensor& composite, const Tensor& truth, SsimScope scope) {
  if (!composite.same_shape(truth)) throw DataError("ssim shape mismatch");
  const std::size_t t_n = composite.dim(0), b_n = composite.dim(1);
  const std::size_t h = composite.dim(2), w = composite.dim(3);
  const std::size_t t_begin = scope == SsimScope::E1_center ? 1 : 0;
  const std::size_t t_end = scope == SsimScope::E1_center ? 2 : t_n;

  double acc = 0.0;
  std::size_t planes = 0;
  for (std::size_t t = t_begin; t < t_end; ++t) {
    for (std::size_t b = 0; b < b_n; ++b) {
      const double* xp = composite.data() + (t * b_n + b) * h * w;
      const double* yp = truth.data() + (t * b_n + b) * h * w;
      acc += ssim_plane(xp, yp, h, w);
      ++planes;
    }
  }
  return acc / static_cast<double>(planes);
}

}  // namespace cloudfill::metrics
