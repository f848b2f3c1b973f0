#pragma once

#include <cstdint>
#include <vector>

#include "cloudfill/chipstore/chip.hpp"

namespace cloudfill::chipstore {

struct SyntheticChipConfig {
  std::size_t scenes = 3;
  std::size_t bands = 6;
  std::size_t patch_align = 8;      // chip dims must divide the ViT patch size
  double noise_amplitude = 0.015;   // i.i.d. per-pixel noise, capped at 0.02
  double drift_amplitude = 0.035;   // per-scene smooth brightness drift
};

// Desk-scale stand-in for real HLS chips: persistent piecewise-constant
// land-cover regions shared by all scenes, per-scene smooth brightness
// drift, small i.i.d. noise. Pure function of (args, seed).
std::vector<Chip> generate_synthetic_chips(std::size_t count, std::size_t height,
                                           std::size_t width, std::uint64_t seed,
                                           const SyntheticChipConfig& cfg = {});

// Spatially coherent cloud blobs (top-k of a smoothed random field) with
// coverages stratified across (0,1]. Pure function of (args, seed).
std::vector<CloudMask> generate_synthetic_masks(std::size_t count, std::size_t height,
                                                std::size_t width, std::uint64_t seed);

}  // namespace cloudfill::chipstore
