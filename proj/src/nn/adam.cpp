#include "cloudfill/nn/adam.hpp"

#include <cmath>

#include "cloudfill/kernels/kernels.hpp"

namespace cloudfill::nn {

Adam::Adam(ParamRefs params, double lr, double beta1, double beta2, double eps)
    : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const Param* p : params_) {
    m_.emplace_back(Tensor(p->w.shape()));
    v_.emplace_back(Tensor(p->w.shape()));
  }
}

void Adam::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  const auto& k = kern::active();
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Param& p = *params_[i];
    k.adam_step(p.w.data(), p.g.data(), m_[i].data(), v_[i].data(), p.w.numel(),
                lr_, beta1_, beta2_, eps_, bc1, bc2);
  }
}

void Adam::zero_grad() {
  for (Param* p : params_) p->zero_grad();
}

}  // namespace cloudfill::nn
