#pragma once

#include <string>

#include "cloudfill/core/rng.hpp"
#include "cloudfill/nn/param.hpp"

namespace cloudfill::nn {

// Layers with explicit forward/backward. forward() caches what backward()
// needs; backward() accumulates parameter gradients and returns the input
// gradient. Single-sample (no batch axis); batching is an outer loop.

void add_inplace(Tensor& dst, const Tensor& src);

struct Linear {
  Param W;  // [in x out]
  Param b;  // [out]

  void init(std::size_t in, std::size_t out, const std::string& name, Rng& rng);
  Tensor forward(const Tensor& x);    // [S,in] -> [S,out]
  Tensor backward(const Tensor& dy);  // [S,out] -> [S,in]
  ParamRefs params();

 private:
  Tensor x_;
};

struct LayerNorm {
  Param gamma;
  Param beta;
  double eps = 1e-6;

  void init(std::size_t dim, const std::string& name);
  Tensor forward(const Tensor& x);  // normalizes each row
  Tensor backward(const Tensor& dy);
  ParamRefs params();

 private:
  Tensor xhat_;
  std::vector<double> rstd_;
};

struct Gelu {
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy);

 private:
  Tensor x_;
};

struct MultiHeadAttention {
  std::size_t dim = 0;
  std::size_t heads = 0;
  std::size_t head_dim = 0;
  Linear qkv;   // dim -> 3*dim
  Linear proj;  // dim -> dim

  void init(std::size_t dim, std::size_t heads, const std::string& name, Rng& rng);
  Tensor forward(const Tensor& x);  // [S,dim] -> [S,dim]
  Tensor backward(const Tensor& dy);
  ParamRefs params();

 private:
  Tensor qkv_out_;              // [S, 3*dim]
  std::vector<Tensor> probs_;   // per head [S,S]
};

// pre-norm block: x + attn(ln1(x)), then + mlp(ln2(.))
struct TransformerBlock {
  LayerNorm ln1;
  LayerNorm ln2;
  MultiHeadAttention attn;
  Linear fc1;
  Linear fc2;
  Gelu act;

  void init(std::size_t dim, std::size_t heads, std::size_t hidden,
            const std::string& name, Rng& rng);
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy);
  ParamRefs params();
};

}  // namespace cloudfill::nn
