#pragma once

#include <string>

#include "cloudfill/core/rng.hpp"
#include "cloudfill/nn/param.hpp"

namespace cloudfill::nn {

// Single-sample conv stack primitives over [C,H,W] tensors.

struct Conv2d {
  Param W;  // [out_c x in_c*k*k]
  Param b;  // [out_c]
  std::size_t in_c = 0, out_c = 0, k = 0, stride = 1, pad = 0;

  static std::size_t out_dim(std::size_t in, std::size_t k, std::size_t stride,
                             std::size_t pad);

  void init(std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
            std::size_t stride_, std::size_t pad_, const std::string& name, Rng& rng);
  Tensor forward(const Tensor& x);    // [in_c,H,W] -> [out_c,OH,OW]
  Tensor backward(const Tensor& dy);  // [out_c,OH,OW] -> [in_c,H,W]
  ParamRefs params();

 private:
  std::size_t h_ = 0, w_ = 0, oh_ = 0, ow_ = 0;
  Tensor col_;  // [in_c*k*k, OH*OW]
};

struct LeakyRelu {
  double slope = 0.2;

  explicit LeakyRelu(double s = 0.2) : slope(s) {}
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy);

 private:
  Tensor x_;
};

struct Relu : LeakyRelu {
  Relu() : LeakyRelu(0.0) {}
};

struct AvgPool2 {
  Tensor forward(const Tensor& x);  // [C,H,W] -> [C,H/2,W/2]
  Tensor backward(const Tensor& dy);

 private:
  std::size_t c_ = 0, h_ = 0, w_ = 0;
};

struct NearestUp2 {
  Tensor forward(const Tensor& x);  // [C,H,W] -> [C,2H,2W]
  Tensor backward(const Tensor& dy);

 private:
  std::size_t c_ = 0, h_ = 0, w_ = 0;
};

// standalone average-pool used to build multi-scale discriminator inputs
Tensor avg_pool2(const Tensor& x);
// its adjoint: spreads [C,H/2,W/2] gradients back to [C,H,W]
Tensor avg_pool2_backward(const Tensor& dy, std::size_t h, std::size_t w);

}  // namespace cloudfill::nn
