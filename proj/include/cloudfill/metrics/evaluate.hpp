#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cloudfill/metrics/metrics.hpp"

namespace cloudfill::metrics {

// One model-agnostic evaluation pathway, shared by training-loop
// validation, eval, and zero-shot: fixed validation pairing, reconstruct,
// composite, masked MAE, scoped SSIM.

using ReconstructFn = std::function<Tensor(const MaskedChip&)>;

struct EvalOutcome {
  std::vector<MetricsRecord> records;  // one row per evaluated chip
  double mean_mae = 0.0;
  double mean_ssim = 0.0;
  std::size_t skipped = 0;  // chips the model rejected (fully-masked input)
};

EvalOutcome evaluate_set(const std::vector<Chip>& chips,
                         const std::vector<masking::CloudMask>& pool,
                         masking::Mode mode, const std::string& model_tag,
                         std::size_t epoch, const ReconstructFn& reconstruct);

// per-epoch training curve entry, shared by both trainers
struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_mae = 0.0;
  double train_ssim = 0.0;
  double val_mae = 0.0;
  double val_ssim = 0.0;
  double d_loss = 0.0;  // cgan only
  double g_loss = 0.0;  // cgan only
  std::size_t skipped = 0;
};

}  // namespace cloudfill::metrics
