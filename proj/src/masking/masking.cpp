#include "cloudfill/masking/masking.hpp"

#include <algorithm>
#include <cmath>

#include "cloudfill/core/errors.hpp"
#include "cloudfill/core/hash.hpp"
#include "cloudfill/core/rng.hpp"

namespace cloudfill::masking {

const char* mode_name(Mode m) { return m == Mode::E1 ? "E1" : "E2"; }

Mode parse_mode(const std::string& s) {
  if (s == "E1" || s == "e1") return Mode::E1;
  if (s == "E2" || s == "e2") return Mode::E2;
  throw ConfigError("unknown mode '" + s + "', expected E1 or E2");
}

std::size_t PixelMask::count() const {
  std::size_t n = 0;
  for (std::uint8_t b : v) n += b;
  return n;
}

bool PixelMask::scene_has_mask(std::size_t t) const {
  const std::uint8_t* p = scene(t);
  for (std::size_t i = 0; i < height * width; ++i) {
    if (p[i]) return true;
  }
  return false;
}

std::vector<std::uint8_t> PixelMask::scene_union() const {
  std::vector<std::uint8_t> u(height * width, 0);
  for (std::size_t t = 0; t < scenes; ++t) {
    const std::uint8_t* p = scene(t);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] |= p[i];
  }
  return u;
}

MaskAssignment assign_masks(const Chip& chip, const std::vector<CloudMask>& pool,
                            Mode mode, std::uint64_t seed) {
  if (pool.empty()) throw DataError("mask pool is empty");
  for (const CloudMask& m : pool) {
    if (m.height != chip.height || m.width != chip.width) {
      throw DataError("mask " + m.id + " dims do not match chip " + chip.id);
    }
  }
  if (chip.scenes < 2) throw DataError("chip " + chip.id + " has fewer than 2 scenes");

  Rng rng(mix64(fnv1a64(chip.id), seed));

  MaskAssignment a;
  a.mode = mode;
  a.per_scene.assign(chip.scenes, std::nullopt);
  a.pixel_mask.scenes = chip.scenes;
  a.pixel_mask.height = chip.height;
  a.pixel_mask.width = chip.width;
  a.pixel_mask.v.assign(chip.scenes * chip.height * chip.width, 0);

  std::vector<std::size_t> chosen;
  if (mode == Mode::E1) {
    chosen.push_back(1);  // middle scene for T=3
  } else {
    const std::uint64_t subsets = (1ull << chip.scenes) - 1;
    const std::uint64_t bits = 1 + rng.uniform_int(subsets);
    for (std::size_t t = 0; t < chip.scenes; ++t) {
      if (bits & (1ull << t)) chosen.push_back(t);
    }
  }

  for (std::size_t t : chosen) {
    const CloudMask& m = pool[rng.uniform_int(pool.size())];
    a.per_scene[t] = m.id;
    std::uint8_t* dst = a.pixel_mask.v.data() + t * chip.height * chip.width;
    std::copy(m.mask.begin(), m.mask.end(), dst);
  }
  return a;
}

MaskedChip apply_mask(const Chip& chip, const MaskAssignment& assignment,
                      double fill) {
  const PixelMask& pm = assignment.pixel_mask;
  if (pm.scenes != chip.scenes || pm.height != chip.height || pm.width != chip.width) {
    throw DataError("assignment dims do not match chip " + chip.id);
  }
  MaskedChip mc;
  mc.chip_id = chip.id;
  mc.fill = fill;
  mc.assignment = assignment;
  mc.masked_data = chip.data;
  for (std::size_t t = 0; t < chip.scenes; ++t) {
    for (std::size_t r = 0; r < chip.height; ++r) {
      for (std::size_t c = 0; c < chip.width; ++c) {
        if (pm.at(t, r, c)) {
          for (std::size_t b = 0; b < chip.bands; ++b) {
            mc.masked_data.at4(t, b, r, c) = fill;
          }
        }
      }
    }
  }
  return mc;
}

std::vector<std::uint8_t> lift_to_patch_mask(const PixelMask& pixel_mask,
                                             std::size_t patch_size) {
  if (patch_size == 0 || pixel_mask.height % patch_size != 0 ||
      pixel_mask.width % patch_size != 0) {
    throw ConfigError("mask dims not divisible by patch size " +
                      std::to_string(patch_size));
  }
  const std::size_t gh = pixel_mask.height / patch_size;
  const std::size_t gw = pixel_mask.width / patch_size;
  std::vector<std::uint8_t> out(pixel_mask.scenes * gh * gw, 0);
  for (std::size_t t = 0; t < pixel_mask.scenes; ++t) {
    for (std::size_t r = 0; r < pixel_mask.height; ++r) {
      for (std::size_t c = 0; c < pixel_mask.width; ++c) {
        if (pixel_mask.at(t, r, c)) {
          out[(t * gh + r / patch_size) * gw + c / patch_size] = 1;
        }
      }
    }
  }
  return out;
}

int coverage_bin(double coverage, int bins) {
  // coverage in (0,1]; bin k covers ((k-1)/bins, k/bins]
  int b = static_cast<int>(std::ceil(coverage * bins)) - 1;
  return std::clamp(b, 0, bins - 1);
}

std::vector<CloudMask> balance_mask_pool(const std::vector<CloudMask>& masks,
                                         int bins, int per_bin,
                                         std::uint64_t seed) {
  if (bins < 1 || per_bin < 1) throw ConfigError("bins and per_bin must be >= 1");
  std::vector<std::vector<std::size_t>> by_bin(static_cast<std::size_t>(bins));
  for (std::size_t i = 0; i < masks.size(); ++i) {
    by_bin[static_cast<std::size_t>(coverage_bin(masks[i].coverage, bins))].push_back(i);
  }
  Rng base = Rng(seed).derive("balance");
  std::vector<CloudMask> out;
  out.reserve(static_cast<std::size_t>(bins) * static_cast<std::size_t>(per_bin));
  for (int b = 0; b < bins; ++b) {
    auto& candidates = by_bin[static_cast<std::size_t>(b)];
    if (candidates.size() < static_cast<std::size_t>(per_bin)) {
      throw DataError("coverage bin " + std::to_string(b + 1) + "/" +
                      std::to_string(bins) + " has " +
                      std::to_string(candidates.size()) + " masks, need " +
                      std::to_string(per_bin) + " (short by " +
                      std::to_string(per_bin - static_cast<int>(candidates.size())) + ")");
    }
    Rng rng = base.derive(static_cast<std::uint64_t>(b));
    rng.shuffle(candidates);
    for (int j = 0; j < per_bin; ++j) out.push_back(masks[candidates[static_cast<std::size_t>(j)]]);
  }
  return out;
}

namespace {
// frozen salt for the validation pairing stream; never reused for training
constexpr std::uint64_t kValidationSalt = 0x76616c6d61736b73ull;  // "valmasks"
}  // namespace

MaskAssignment validation_assignment(const Chip& chip,
                                     const std::vector<CloudMask>& pool, Mode mode) {
  const std::uint64_t seed = mix64(kValidationSalt, fnv1a64(mode_name(mode)));
  return assign_masks(chip, pool, mode, seed);
}

MaskAssignment training_assignment(const Chip& chip,
                                   const std::vector<CloudMask>& pool, Mode mode,
                                   std::uint64_t seed, std::size_t epoch) {
  return assign_masks(chip, pool, mode, mix64(seed, 0x74726e00ull + epoch));
}

}  // namespace cloudfill::masking
