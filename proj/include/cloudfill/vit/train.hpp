#pragma once

#include <cstdint>
#include <vector>

#include "cloudfill/metrics/evaluate.hpp"
#include "cloudfill/vit/vit.hpp"

namespace cloudfill::vit {

using chipstore::Chip;
using chipstore::CloudMask;

struct VitTrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 8;
  double lr = 1e-3;
  std::uint64_t seed = 1;
  masking::Mode mode = masking::Mode::E1;
  double fill = 0.0;
  bool random_patch_masking = false;  // MAE-style pretraining source
  double mask_ratio = 0.5;            // used when random_patch_masking
};

struct VitTrainResult {
  std::vector<metrics::EpochStats> history;
  std::size_t best_epoch = 0;  // 1-based
  double best_val_mae = 0.0;
  double best_val_ssim = 0.0;
  std::vector<Tensor> best_weights;  // aligned with model.params()
  std::vector<metrics::MetricsRecord> val_records;  // all epochs
};

// random patch dropping for pretraining, deterministic per (chip id, seed, epoch)
masking::MaskAssignment random_patch_assignment(const Chip& chip, std::size_t patch,
                                                double ratio, masking::Mode mode_tag,
                                                std::uint64_t seed, std::size_t epoch);

VitTrainResult train_vit(ViTModel& model, const std::vector<Chip>& train_chips,
                         const std::vector<CloudMask>& train_pool,
                         const std::vector<Chip>& val_chips,
                         const std::vector<CloudMask>& val_pool,
                         const VitTrainConfig& cfg);

}  // namespace cloudfill::vit
