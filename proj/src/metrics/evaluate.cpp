#include "cloudfill/metrics/evaluate.hpp"

#include "cloudfill/core/errors.hpp"

namespace cloudfill::metrics {

EvalOutcome evaluate_set(const std::vector<Chip>& chips,
                         const std::vector<masking::CloudMask>& pool,
                         masking::Mode mode, const std::string& model_tag,
                         std::size_t epoch, const ReconstructFn& reconstruct) {
  EvalOutcome out;
  for (const Chip& chip : chips) {
    const masking::MaskAssignment a = masking::validation_assignment(chip, pool, mode);
    const MaskedChip mc = masking::apply_mask(chip, a, 0.0);
    Tensor rec;
    try {
      rec = reconstruct(mc);
    } catch (const DataError&) {
      // surfaced per chip: the model rejected this pairing (e.g. a ViT
      // input with every patch dropped); the chip is skipped, not scored
      ++out.skipped;
      continue;
    }
    MetricsRecord r;
    r.chip_id = chip.id;
    r.model = model_tag;
    r.mode = mode;
    r.epoch = epoch;
    r.coverage = chip_coverage(a.pixel_mask);
    r.max_gap_days = chip.max_gap_days();
    r.mae_masked = mae_masked(rec, chip.data, a.pixel_mask);
    const Tensor comp = composite(rec, chip.data, a.pixel_mask);
    r.ssim = ssim(comp, chip.data,
                  mode == masking::Mode::E1 ? SsimScope::E1_center : SsimScope::E2_all);
    out.records.push_back(std::move(r));
  }
  if (!out.records.empty()) {
    for (const MetricsRecord& r : out.records) {
      out.mean_mae += r.mae_masked;
      out.mean_ssim += r.ssim;
    }
    out.mean_mae /= static_cast<double>(out.records.size());
    out.mean_ssim /= static_cast<double>(out.records.size());
  }
  return out;
}

}  // namespace cloudfill::metrics
