#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "cloudfill/masking/masking.hpp"
#include "cloudfill/nn/layers.hpp"

namespace cloudfill::vit {

using masking::MaskedChip;

struct ViTConfig {
  std::size_t patch = 8;
  std::size_t embed_dim = 128;
  std::size_t enc_depth = 4;
  std::size_t enc_heads = 4;
  std::size_t dec_dim = 64;
  std::size_t dec_depth = 2;
  std::size_t dec_heads = 4;
  std::size_t mlp_ratio = 2;
  std::size_t scenes = 3;
  std::size_t bands = 6;
  std::size_t height = 32;
  std::size_t width = 32;

  void validate() const;  // throws ConfigError
  std::size_t grid_h() const { return height / patch; }
  std::size_t grid_w() const { return width / patch; }
  std::size_t n_patches() const { return scenes * grid_h() * grid_w(); }
  std::size_t patch_len() const { return patch * patch * bands; }
};

// tokens for the visible patches plus the visible/masked index partition
struct PatchSet {
  Tensor tokens;  // [n_visible x p*p*B]
  std::vector<std::size_t> visible;
  std::vector<std::size_t> masked;
};

// all patch vectors of a [T,B,H,W] stack, row n = patch (t, gi, gj) with
// n = (t*gh + gi)*gw + gj, flattened in (band, row, col) order
Tensor patch_matrix(const Tensor& data, std::size_t patch);
Tensor unpatchify(const Tensor& patches, std::size_t scenes, std::size_t bands,
                  std::size_t height, std::size_t width, std::size_t patch);

// splits by the any-cloudy-pixel patch rule; tokens carry visible rows only
PatchSet patchify(const MaskedChip& mc, std::size_t patch);

// mean squared error over pixels belonging to masked patches
double mse_masked_patches(const Tensor& reconstruction, const Tensor& truth,
                          const std::vector<std::uint8_t>& patch_mask,
                          std::size_t patch);

// fixed 3D sine-cosine positional table, one row per patch index
Tensor sincos_position_table(const ViTConfig& cfg, std::size_t dim);

class ViTModel {
 public:
  ViTModel(ViTConfig cfg, std::uint64_t init_seed);

  const ViTConfig& config() const { return cfg_; }

  // Encodes visible tokens only, decodes the full sequence with mask
  // tokens at dropped positions, emits pixel values for every patch.
  // dec_order, when given, permutes the decoder processing order (the
  // output must not depend on it). Throws DataError on fully-masked input.
  Tensor reconstruct(const MaskedChip& mc,
                     const std::vector<std::size_t>* dec_order = nullptr);

  // reconstruct + backprop of mse_masked_patches; returns the loss and,
  // when asked, the reconstruction itself
  double loss_and_grad(const MaskedChip& mc, const Tensor& truth,
                       Tensor* rec_out = nullptr);

  nn::ParamRefs params();
  std::vector<std::uint8_t> last_patch_mask() const { return patch_mask_; }

 private:
  ViTConfig cfg_;
  nn::Linear patch_embed_;
  std::vector<nn::TransformerBlock> enc_blocks_;
  nn::LayerNorm enc_norm_;
  nn::Linear dec_embed_;
  nn::Param mask_token_;  // [dec_dim]
  std::vector<nn::TransformerBlock> dec_blocks_;
  nn::LayerNorm dec_norm_;
  nn::Linear head_;
  Tensor enc_pos_;
  Tensor dec_pos_;

  // forward caches
  std::vector<std::size_t> visible_;
  std::vector<std::size_t> masked_;
  std::vector<std::size_t> order_;  // decoder sequence order used
  std::vector<std::uint8_t> patch_mask_;
};

// checkpoint format "VITC"
void save_checkpoint(const ViTModel& model, const std::filesystem::path& path,
                     std::uint32_t epoch, double val_mae);
ViTModel load_checkpoint(const std::filesystem::path& path);

}  // namespace cloudfill::vit
