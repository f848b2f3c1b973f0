#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "cloudfill/chipstore/chip.hpp"
#include "cloudfill/masking/masking.hpp"
#include "cloudfill/metrics/ssim.hpp"

namespace cloudfill::metrics {

using chipstore::Chip;
using masking::MaskAssignment;
using masking::MaskedChip;
using masking::PixelMask;

// truth wherever mask = 0, generated wherever mask = 1 (bit-exact select)
Tensor composite(const Tensor& generated, const Tensor& truth, const PixelMask& mask);

// mean absolute / squared error over masked pixels, all bands pooled;
// throws DataError when the mask selects nothing
double mae_masked(const Tensor& generated, const Tensor& truth, const PixelMask& mask);
double masked_mse(const Tensor& generated, const Tensor& truth, const PixelMask& mask);

enum class BaselineStrategy { copy_nearest_scene, mean_of_unmasked_scenes };

// naive temporal imputation yardstick; pixels masked in every scene fall
// back to the dataset mean reflectance 0.15
Tensor baseline_impute(const MaskedChip& mc, const std::vector<std::uint32_t>& dates,
                       BaselineStrategy strategy);

struct MetricsRecord {
  std::string chip_id;
  std::string model;  // "vit" | "cgan" | "baseline-..."
  masking::Mode mode = masking::Mode::E1;
  std::size_t epoch = 0;
  double coverage = 0.0;       // over masked scenes
  std::uint32_t max_gap_days = 0;
  double mae_masked = 0.0;
  double ssim = 0.0;
};

// 4x4 Pearson matrix over {coverage, max gap, mae, ssim}; entries with a
// constant column are NaN with defined=false
struct CorrelationReport {
  std::array<std::array<double, 4>, 4> r;
  std::array<std::array<bool, 4>, 4> defined;
  static const std::array<const char*, 4>& field_names();
};

CorrelationReport correlation_report(const std::vector<MetricsRecord>& records);

// (scene,band) x (scene,band) Pearson matrix over the masked-pixel
// population (union of per-scene masks)
struct BandCorrMatrix {
  std::size_t channels = 0;  // T*B
  std::vector<double> r;     // channels x channels
  std::vector<std::uint8_t> defined;
  double at(std::size_t i, std::size_t j) const { return r[i * channels + j]; }
};

BandCorrMatrix band_correlation(const Tensor& values, const PixelMask& mask);

// accumulates masked-pixel channel samples across chips, then one matrix
class BandCorrAccumulator {
 public:
  void add(const Tensor& values, const PixelMask& mask);
  BandCorrMatrix finalize() const;

 private:
  std::size_t channels_ = 0;
  std::vector<std::vector<double>> samples_;
};

// per-chip coverage for records: masked pixels / pixels in masked scenes
double chip_coverage(const PixelMask& mask);

}  // namespace cloudfill::metrics
