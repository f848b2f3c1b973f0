#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cloudfill/core/tensor.hpp"

namespace cloudfill::chipstore {

// One sample: a [T scenes x B bands x H x W] reflectance stack in [0,1]
// plus per-scene acquisition dates (days since 1970-01-01).
struct Chip {
  std::string id;
  std::size_t scenes = 0;
  std::size_t bands = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint32_t> dates;
  Tensor data;  // [T,B,H,W]

  double& at(std::size_t t, std::size_t b, std::size_t r, std::size_t c) {
    return data.at4(t, b, r, c);
  }
  double at(std::size_t t, std::size_t b, std::size_t r, std::size_t c) const {
    return data.at4(t, b, r, c);
  }

  std::uint32_t max_gap_days() const;

  // throws DataError on any invariant violation
  void validate() const;
};

// One H x W binary cloud layer (1 = cloudy) with cached coverage.
struct CloudMask {
  std::string id;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> mask;
  double coverage = 0.0;

  std::uint8_t at(std::size_t r, std::size_t c) const { return mask[r * width + c]; }

  std::size_t cloudy_count() const;

  // computes coverage; rejects all-zero masks and values outside {0,1}
  static CloudMask from_pixels(std::string id, std::size_t height, std::size_t width,
                               std::vector<std::uint8_t> pixels);

  void validate() const;
};

struct DatasetSplit {
  std::vector<std::string> train_ids;
  std::vector<std::string> val_ids;
  std::vector<std::string> train_mask_ids;
  std::vector<std::string> val_mask_ids;
};

}  // namespace cloudfill::chipstore
