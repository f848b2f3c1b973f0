#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cloudfill/masking/masking.hpp"
#include "cloudfill/nn/conv.hpp"

namespace cloudfill::cgan {

using masking::MaskedChip;
using masking::PixelMask;

struct CganConfig {
  std::size_t scenes = 3;
  std::size_t bands = 6;
  std::size_t height = 32;
  std::size_t width = 32;
  std::size_t gen_base = 16;          // generator channel width
  std::size_t disc_base = 16;         // discriminator channel width
  std::size_t disc_down_stages = 2;   // stride-2 stages among the 4 conv
                                      // stages; 3 at full chip scale for a
                                      // ~70 px receptive field

  std::size_t image_channels() const { return scenes * bands; }
  std::size_t cond_channels() const { return scenes * bands + scenes; }
  std::size_t disc_in_channels() const { return cond_channels() + image_channels(); }
  void validate() const;
};

// U-shaped conv encoder-decoder over the stacked masked scenes + mask
// channels; linear output head (no clamp: downstream composites only
// masked pixels)
class Generator {
 public:
  Generator(const CganConfig& cfg, std::uint64_t init_seed);

  Tensor forward(const Tensor& x);    // [cond_c,H,W] -> [img_c,H,W]
  Tensor backward(const Tensor& dy);  // accumulates grads, returns dx
  nn::ParamRefs params();

 private:
  CganConfig cfg_;
  nn::Conv2d e0_, e1_, e2_, mid_, d2_, d1_, out_;
  nn::Relu r0_, r1_, r2_, rm_, rd2_, rd1_;
  nn::NearestUp2 up2_, up1_;
  Tensor a0_, a1_;  // skip caches
};

// 4 conv stages (LeakyReLU 0.2) + 1-channel head, all k=4 p=1; the first
// disc_down_stages stages use stride 2
class PatchDiscriminator {
 public:
  PatchDiscriminator(std::size_t in_channels, std::size_t base,
                     std::size_t down_stages, const std::string& name,
                     std::uint64_t init_seed);

  Tensor forward(const Tensor& x);        // [C,H,W] -> [1,mh,mw]
  Tensor backward(const Tensor& dscore);  // to input gradient
  nn::ParamRefs params();

  // any-cloudy-pixel lift of an [h x w] mask to the score-map cells
  std::vector<std::uint8_t> lift_validity(const std::vector<std::uint8_t>& mask,
                                          std::size_t h, std::size_t w) const;

 private:
  std::vector<nn::Conv2d> convs_;
  std::vector<nn::LeakyRelu> acts_;
};

struct GanTrainConfig {
  double lr_d = 1e-4;
  double lr_g = 5e-4;
  double alpha = 5.0;
  std::size_t epochs = 50;
  std::size_t batch_size = 8;
  std::uint64_t seed = 1;
  masking::Mode mode = masking::Mode::E1;
  double fill = 0.0;
};

class CganModel {
 public:
  CganModel(CganConfig cfg, std::uint64_t init_seed);

  const CganConfig& config() const { return cfg_; }
  Generator& generator() { return gen_; }
  PatchDiscriminator& disc_full() { return d_full_; }
  PatchDiscriminator& disc_half() { return d_half_; }
  nn::ParamRefs gen_params() { return gen_.params(); }
  nn::ParamRefs disc_params();

 private:
  CganConfig cfg_;
  Generator gen_;
  PatchDiscriminator d_full_;
  PatchDiscriminator d_half_;
};

// [T,B,H,W] <-> [T*B,H,W] channel stacking
Tensor flatten_scenes(const Tensor& tbhw);
Tensor unflatten_scenes(const Tensor& chw, std::size_t scenes, std::size_t bands);

// masked data + mask channels, the conditioning input of Fig-style training
Tensor stack_condition(const MaskedChip& mc);
Tensor concat_channels(const Tensor& a, const Tensor& b);

// full-field generation for a masked chip, deterministic per (params, input)
Tensor generate(Generator& gen, const MaskedChip& mc);

// 2x2/stride-2 any-reduction, the mask-side counterpart of avg_pool2
std::vector<std::uint8_t> any_pool2(const std::vector<std::uint8_t>& mask,
                                    std::size_t h, std::size_t w);

// hinge losses over per-scale score maps restricted to valid cells
// (cells whose receptive field contains at least one cloudy pixel)
double hinge_d_loss(const std::vector<Tensor>& real_scores,
                    const std::vector<Tensor>& fake_scores,
                    const std::vector<std::vector<std::uint8_t>>& valid);
double hinge_g_loss(const std::vector<Tensor>& fake_scores,
                    const std::vector<std::vector<std::uint8_t>>& valid);
double masked_mse(const Tensor& generated, const Tensor& truth, const PixelMask& mask);
double total_g_loss(const Tensor& generated, const Tensor& truth,
                    const std::vector<Tensor>& fake_scores, const PixelMask& mask,
                    const std::vector<std::vector<std::uint8_t>>& valid, double alpha);

// checkpoint format "CGNC"
void save_checkpoint(CganModel& model, const std::filesystem::path& path,
                     std::uint32_t epoch, double val_mae);
CganModel load_checkpoint(const std::filesystem::path& path);

}  // namespace cloudfill::cgan
