#pragma once

#include <string>
#include <vector>

#include "cloudfill/core/tensor.hpp"

namespace cloudfill::nn {

struct Param {
  std::string name;
  Tensor w;
  Tensor g;

  void init(std::string param_name, std::vector<std::size_t> shape) {
    name = std::move(param_name);
    w = Tensor(shape);
    g = Tensor(std::move(shape));
  }

  void zero_grad() { g.zero(); }
};

using ParamRefs = std::vector<Param*>;

inline void append(ParamRefs& dst, const ParamRefs& src) {
  dst.insert(dst.end(), src.begin(), src.end());
}

inline std::vector<Tensor> snapshot_params(const ParamRefs& params) {
  std::vector<Tensor> out;
  out.reserve(params.size());
  for (const Param* p : params) out.push_back(p->w);
  return out;
}

inline void restore_params(const ParamRefs& params, const std::vector<Tensor>& snap) {
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->w = snap[i];
}

}  // namespace cloudfill::nn
