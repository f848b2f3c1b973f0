#include "cloudfill/vit/train.hpp"

#include <cmath>
#include <limits>

#include "cloudfill/core/errors.hpp"
#include "cloudfill/core/hash.hpp"
#include "cloudfill/kernels/kernels.hpp"
#include "cloudfill/nn/adam.hpp"

namespace cloudfill::vit {

masking::MaskAssignment random_patch_assignment(const Chip& chip, std::size_t patch,
                                                double ratio, masking::Mode mode_tag,
                                                std::uint64_t seed, std::size_t epoch) {
  const std::size_t gh = chip.height / patch, gw = chip.width / patch;
  const std::size_t total = chip.scenes * gh * gw;
  std::size_t n_drop = static_cast<std::size_t>(ratio * static_cast<double>(total));
  n_drop = std::min(std::max<std::size_t>(n_drop, 1), total - 1);

  Rng rng(mix64(mix64(fnv1a64(chip.id), seed), 0x7061746368ull + epoch));
  std::vector<std::size_t> order(total);
  for (std::size_t i = 0; i < total; ++i) order[i] = i;
  rng.shuffle(order);

  masking::MaskAssignment a;
  a.mode = mode_tag;
  a.per_scene.assign(chip.scenes, std::nullopt);
  a.pixel_mask.scenes = chip.scenes;
  a.pixel_mask.height = chip.height;
  a.pixel_mask.width = chip.width;
  a.pixel_mask.v.assign(chip.scenes * chip.height * chip.width, 0);
  for (std::size_t i = 0; i < n_drop; ++i) {
    const std::size_t n = order[i];
    const std::size_t t = n / (gh * gw);
    const std::size_t gi = (n / gw) % gh;
    const std::size_t gj = n % gw;
    for (std::size_t r = 0; r < patch; ++r) {
      for (std::size_t c = 0; c < patch; ++c) {
        a.pixel_mask.at(t, gi * patch + r, gj * patch + c) = 1;
      }
    }
  }
  return a;
}

VitTrainResult train_vit(ViTModel& model, const std::vector<Chip>& train_chips,
                         const std::vector<CloudMask>& train_pool,
                         const std::vector<Chip>& val_chips,
                         const std::vector<CloudMask>& val_pool,
                         const VitTrainConfig& cfg) {
  if (train_chips.empty()) throw DataError("empty training set");
  if (!cfg.random_patch_masking && train_pool.empty()) {
    throw DataError("empty training mask pool");
  }

  const std::size_t patch = model.config().patch;
  nn::ParamRefs params = model.params();
  nn::Adam opt(params, cfg.lr);
  const Rng shuffle_base = Rng(cfg.seed).derive("vit/shuffle");

  VitTrainResult result;
  result.best_val_mae = std::numeric_limits<double>::infinity();

  const auto reconstruct_fn = [&model](const masking::MaskedChip& mc) {
    return model.reconstruct(mc);
  };

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::vector<std::size_t> order(train_chips.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng erng = shuffle_base.derive(epoch);
    erng.shuffle(order);

    metrics::EpochStats stats;
    stats.epoch = epoch;
    double loss_sum = 0.0, mae_sum = 0.0, ssim_sum = 0.0;
    std::size_t n_scored = 0;

    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      opt.zero_grad();
      std::size_t n_in_batch = 0;
      for (std::size_t i = begin; i < end; ++i) {
        const Chip& chip = train_chips[order[i]];
        const masking::MaskAssignment a =
            cfg.random_patch_masking
                ? random_patch_assignment(chip, patch, cfg.mask_ratio, cfg.mode,
                                          cfg.seed, epoch)
                : masking::training_assignment(chip, train_pool, cfg.mode, cfg.seed,
                                               epoch);
        const masking::MaskedChip mc = masking::apply_mask(chip, a, cfg.fill);
        Tensor rec;
        double loss;
        try {
          loss = model.loss_and_grad(mc, chip.data, &rec);
        } catch (const DataError&) {
          ++stats.skipped;  // fully-masked draw; sample skipped
          continue;
        }
        if (!std::isfinite(loss)) {
          throw DivergenceError("vit training loss non-finite", epoch);
        }
        loss_sum += loss;
        mae_sum += metrics::mae_masked(rec, chip.data, a.pixel_mask);
        const Tensor comp = metrics::composite(rec, chip.data, a.pixel_mask);
        ssim_sum += metrics::ssim(comp, chip.data,
                                  cfg.mode == masking::Mode::E1
                                      ? metrics::SsimScope::E1_center
                                      : metrics::SsimScope::E2_all);
        ++n_scored;
        ++n_in_batch;
      }
      if (n_in_batch == 0) continue;
      const double inv = 1.0 / static_cast<double>(n_in_batch);
      for (nn::Param* p : params) {
        kern::active().scal(inv, p->g.data(), p->g.numel());
      }
      opt.step();
    }

    if (n_scored > 0) {
      stats.train_loss = loss_sum / static_cast<double>(n_scored);
      stats.train_mae = mae_sum / static_cast<double>(n_scored);
      stats.train_ssim = ssim_sum / static_cast<double>(n_scored);
    }

    const metrics::EvalOutcome val = metrics::evaluate_set(
        val_chips, val_pool, cfg.mode, "vit", epoch, reconstruct_fn);
    stats.val_mae = val.mean_mae;
    stats.val_ssim = val.mean_ssim;
    stats.skipped += val.skipped;
    result.val_records.insert(result.val_records.end(), val.records.begin(),
                              val.records.end());

    if (!val.records.empty() && val.mean_mae < result.best_val_mae) {
      result.best_val_mae = val.mean_mae;
      result.best_val_ssim = val.mean_ssim;
      result.best_epoch = epoch;
      result.best_weights = nn::snapshot_params(params);
    }
    result.history.push_back(stats);
  }

  if (result.best_weights.empty()) {
    result.best_weights = nn::snapshot_params(params);
    result.best_epoch = cfg.epochs;
  }
  return result;
}

}  // namespace cloudfill::vit
