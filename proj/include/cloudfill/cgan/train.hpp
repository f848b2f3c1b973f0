#pragma once

#include <cstdint>
#include <vector>

#include "cloudfill/cgan/cgan.hpp"
#include "cloudfill/metrics/evaluate.hpp"

namespace cloudfill::cgan {

using chipstore::Chip;
using chipstore::CloudMask;

struct CganTrainResult {
  std::vector<metrics::EpochStats> history;
  std::size_t best_epoch = 0;  // 1-based
  double best_val_mae = 0.0;
  double best_val_ssim = 0.0;
  std::vector<Tensor> best_gen_weights;
  std::vector<Tensor> best_disc_weights;
  std::vector<metrics::MetricsRecord> val_records;  // all epochs
};

// Alternating per batch: one discriminator step with the generator frozen,
// then one generator step with the discriminator frozen.
CganTrainResult train_cgan(CganModel& model, const std::vector<Chip>& train_chips,
                           const std::vector<CloudMask>& train_pool,
                           const std::vector<Chip>& val_chips,
                           const std::vector<CloudMask>& val_pool,
                           const GanTrainConfig& cfg);

}  // namespace cloudfill::cgan
