#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cloudfill/chipstore/chip.hpp"

namespace cloudfill::masking {

using chipstore::Chip;
using chipstore::CloudMask;

enum class Mode { E1, E2 };

const char* mode_name(Mode m);
Mode parse_mode(const std::string& s);  // "E1" | "E2"

// [T x H x W] binary layer, broadcast of the per-scene cloud masks
struct PixelMask {
  std::size_t scenes = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> v;

  std::uint8_t at(std::size_t t, std::size_t r, std::size_t c) const {
    return v[(t * height + r) * width + c];
  }
  std::uint8_t& at(std::size_t t, std::size_t r, std::size_t c) {
    return v[(t * height + r) * width + c];
  }
  const std::uint8_t* scene(std::size_t t) const { return v.data() + t * height * width; }

  std::size_t count() const;
  bool scene_has_mask(std::size_t t) const;
  // union over scenes, [H x W]
  std::vector<std::uint8_t> scene_union() const;
};

struct MaskAssignment {
  Mode mode = Mode::E1;
  std::vector<std::optional<std::string>> per_scene;  // mask id per scene, or none
  PixelMask pixel_mask;
};

struct MaskedChip {
  std::string chip_id;
  Tensor masked_data;  // [T,B,H,W], masked pixels set to the fill value
  MaskAssignment assignment;
  double fill = 0.0;
};

// E1: one uniformly drawn mask on scene index 1. E2: uniform non-empty
// subset of scenes, then an independent uniform mask per chosen scene.
// Deterministic per (chip id, seed).
MaskAssignment assign_masks(const Chip& chip, const std::vector<CloudMask>& pool,
                            Mode mode, std::uint64_t seed);

MaskedChip apply_mask(const Chip& chip, const MaskAssignment& assignment,
                      double fill = 0.0);

// [T x H/p x W/p]; a patch is dropped iff any pixel in its footprint is cloudy
std::vector<std::uint8_t> lift_to_patch_mask(const PixelMask& pixel_mask,
                                             std::size_t patch_size);

// exactly per_bin masks from each coverage bin ((k-1)/bins, k/bins]
std::vector<CloudMask> balance_mask_pool(const std::vector<CloudMask>& masks,
                                         int bins, int per_bin,
                                         std::uint64_t seed = 0);

// coverage decile index in [0, bins), by ((k-1)/bins, k/bins] binning
int coverage_bin(double coverage, int bins);

// Fixed validation pairing: a pure function of (chip id, mode), independent
// of model, sample size, run, and training seed.
MaskAssignment validation_assignment(const Chip& chip,
                                     const std::vector<CloudMask>& pool, Mode mode);

// Per-epoch training assignment, deterministic in (chip id, seed, epoch).
MaskAssignment training_assignment(const Chip& chip,
                                   const std::vector<CloudMask>& pool, Mode mode,
                                   std::uint64_t seed, std::size_t epoch);

}  // namespace cloudfill::masking
