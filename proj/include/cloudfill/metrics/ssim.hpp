#pragma once

#include <cstddef>

#include "cloudfill/core/tensor.hpp"

namespace cloudfill::metrics {

enum class SsimScope { E1_center, E2_all };

// SSIM of one plane: 11x11 Gaussian window (sigma 1.5), K1=0.01, K2=0.03,
// data range 1.0, valid-window aggregation. Throws DataError when the
// plane is smaller than the window.
double ssim_plane(const double* x, const double* y, std::size_t h, std::size_t w);

// Per-(scene,band)-plane SSIM averaged over the scoped planes: scene index 1
// only for E1_center, all scenes for E2_all. Inputs are [T,B,H,W].
double ssim(const Tensor& composite, const Tensor& truth, SsimScope scope);

}  // namespace cloudfill::metrics
