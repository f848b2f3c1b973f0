#pragma once

#include "cloudfill/nn/param.hpp"

namespace cloudfill::nn {

// Adaptive moment optimizer over a fixed parameter set.
class Adam {
 public:
  Adam(ParamRefs params, double lr, double beta1 = 0.9, double beta2 = 0.999,
       double eps = 1e-8);

  void step();
  void zero_grad();

  double lr() const { return lr_; }

 private:
  ParamRefs params_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  double lr_;
  double beta1_;
  double beta2_;
  double eps_;
  long t_ = 0;
};

}  // namespace cloudfill::nn
