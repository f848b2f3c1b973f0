#include "cloudfill/cgan/train.hpp"

#include <cmath>
#include <limits>

#include "cloudfill/core/errors.hpp"
#include "cloudfill/kernels/kernels.hpp"
#include "cloudfill/metrics/metrics.hpp"
#include "cloudfill/nn/adam.hpp"

namespace cloudfill::cgan {

namespace {

struct SampleBatchView {
  const Chip* chip;
  masking::MaskAssignment assignment;
};

struct ScaleData {
  Tensor real_in;
  Tensor fake_in;
  std::vector<std::uint8_t> valid;
};

// conditioning + candidate stacks and per-scale validity for one sample
struct DiscInputs {
  ScaleData full;
  ScaleData half;
};

DiscInputs build_disc_inputs(const CganModel& model, const Tensor& cond,
                             const Tensor& truth, const Tensor& comp,
                             const masking::PixelMask& pm) {
  DiscInputs di;
  di.full.real_in = concat_channels(cond, flatten_scenes(truth));
  di.full.fake_in = concat_channels(cond, flatten_scenes(comp));
  di.half.real_in = nn::avg_pool2(di.full.real_in);
  di.half.fake_in = nn::avg_pool2(di.full.fake_in);
  const std::vector<std::uint8_t> u = pm.scene_union();
  CganModel& m = const_cast<CganModel&>(model);
  di.full.valid = m.disc_full().lift_validity(u, pm.height, pm.width);
  di.half.valid = m.disc_half().lift_validity(any_pool2(u, pm.height, pm.width),
                                              pm.height / 2, pm.width / 2);
  return di;
}

std::size_t count_ones(const std::vector<std::uint8_t>& v) {
  std::size_t n = 0;
  for (std::uint8_t b : v) n += b;
  return n;
}

}  // namespace

CganTrainResult train_cgan(CganModel& model, const std::vector<Chip>& train_chips,
                           const std::vector<CloudMask>& train_pool,
                           const std::vector<Chip>& val_chips,
                           const std::vector<CloudMask>& val_pool,
                           const GanTrainConfig& cfg) {
  if (train_chips.empty()) throw DataError("empty training set");
  if (train_pool.empty()) throw DataError("empty training mask pool");

  const CganConfig& mc_cfg = model.config();
  nn::ParamRefs gen_params = model.gen_params();
  nn::ParamRefs disc_params = model.disc_params();
  nn::Adam opt_g(gen_params, cfg.lr_g);
  nn::Adam opt_d(disc_params, cfg.lr_d);
  const Rng shuffle_base = Rng(cfg.seed).derive("cgan/shuffle");

  CganTrainResult result;
  result.best_val_mae = std::numeric_limits<double>::infinity();

  Generator& gen = model.generator();
  const auto reconstruct_fn = [&gen](const masking::MaskedChip& mcp) {
    return generate(gen, mcp);
  };
  const std::size_t img_c = mc_cfg.image_channels();
  const std::size_t cond_c = mc_cfg.cond_channels();

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::vector<std::size_t> order(train_chips.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng erng = shuffle_base.derive(epoch);
    erng.shuffle(order);

    metrics::EpochStats stats;
    stats.epoch = epoch;
    double d_loss_sum = 0.0, g_loss_sum = 0.0, mae_sum = 0.0, ssim_sum = 0.0;
    std::size_t n_scored = 0, n_batches = 0;

    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      ++n_batches;

      std::vector<SampleBatchView> batch;
      for (std::size_t i = begin; i < end; ++i) {
        const Chip& chip = train_chips[order[i]];
        batch.push_back({&chip, masking::training_assignment(chip, train_pool,
                                                             cfg.mode, cfg.seed, epoch)});
      }

      // --- discriminator step, generator frozen ---
      opt_d.zero_grad();
      double batch_d_loss = 0.0;
      for (const SampleBatchView& s : batch) {
        const masking::MaskedChip mcp = masking::apply_mask(*s.chip, s.assignment, cfg.fill);
        const Tensor cond = stack_condition(mcp);
        const Tensor gen_out = unflatten_scenes(gen.forward(cond), mc_cfg.scenes, mc_cfg.bands);
        const Tensor comp =
            metrics::composite(gen_out, s.chip->data, s.assignment.pixel_mask);
        const DiscInputs di =
            build_disc_inputs(model, cond, s.chip->data, comp, s.assignment.pixel_mask);

        double sample_loss = 0.0;
        const ScaleData* scales[2] = {&di.full, &di.half};
        PatchDiscriminator* discs[2] = {&model.disc_full(), &model.disc_half()};
        for (int sc = 0; sc < 2; ++sc) {
          const std::size_t n_valid = count_ones(scales[sc]->valid);
          if (n_valid == 0) {
            throw DataError("no valid discriminator patches for chip " + s.chip->id);
          }
          const double cell_w = 1.0 / (static_cast<double>(n_valid) * 2.0);

          const Tensor s_real = discs[sc]->forward(scales[sc]->real_in);
          Tensor d_real(s_real.shape());
          for (std::size_t i = 0; i < s_real.numel(); ++i) {
            if (!scales[sc]->valid[i]) continue;
            if (1.0 - s_real[i] > 0.0) d_real[i] = -cell_w;
          }
          discs[sc]->backward(d_real);

          const Tensor s_fake = discs[sc]->forward(scales[sc]->fake_in);
          Tensor d_fake(s_fake.shape());
          for (std::size_t i = 0; i < s_fake.numel(); ++i) {
            if (!scales[sc]->valid[i]) continue;
            if (1.0 + s_fake[i] > 0.0) d_fake[i] = cell_w;
          }
          discs[sc]->backward(d_fake);

          sample_loss +=
              hinge_d_loss({s_real}, {s_fake}, {scales[sc]->valid}) / 2.0;
        }
        if (!std::isfinite(sample_loss)) {
          throw DivergenceError("cgan discriminator loss non-finite", epoch);
        }
        batch_d_loss += sample_loss;
      }
      const double inv_b = 1.0 / static_cast<double>(batch.size());
      for (nn::Param* p : disc_params) {
        kern::active().scal(inv_b, p->g.data(), p->g.numel());
      }
      opt_d.step();
      d_loss_sum += batch_d_loss * inv_b;

      // --- generator step, discriminator frozen ---
      opt_g.zero_grad();
      double batch_g_loss = 0.0;
      for (const SampleBatchView& s : batch) {
        const masking::MaskedChip mcp = masking::apply_mask(*s.chip, s.assignment, cfg.fill);
        const Tensor cond = stack_condition(mcp);
        const Tensor gen_flat = gen.forward(cond);
        const Tensor gen_out = unflatten_scenes(gen_flat, mc_cfg.scenes, mc_cfg.bands);
        const Tensor comp =
            metrics::composite(gen_out, s.chip->data, s.assignment.pixel_mask);
        const DiscInputs di =
            build_disc_inputs(model, cond, s.chip->data, comp, s.assignment.pixel_mask);

        const Tensor s_f1 = model.disc_full().forward(di.full.fake_in);
        Tensor ds1(s_f1.shape());
        const std::size_t n1 = count_ones(di.full.valid);
        for (std::size_t i = 0; i < s_f1.numel(); ++i) {
          if (di.full.valid[i]) ds1[i] = -1.0 / (static_cast<double>(n1) * 2.0);
        }
        const Tensor din1 = model.disc_full().backward(ds1);

        const Tensor s_f2 = model.disc_half().forward(di.half.fake_in);
        Tensor ds2(s_f2.shape());
        const std::size_t n2 = count_ones(di.half.valid);
        for (std::size_t i = 0; i < s_f2.numel(); ++i) {
          if (di.half.valid[i]) ds2[i] = -1.0 / (static_cast<double>(n2) * 2.0);
        }
        const Tensor din2_half = model.disc_half().backward(ds2);
        const Tensor din2 =
            nn::avg_pool2_backward(din2_half, mc_cfg.height, mc_cfg.width);

        const double g_loss = total_g_loss(gen_out, s.chip->data, {s_f1, s_f2},
                                           s.assignment.pixel_mask,
                                           {di.full.valid, di.half.valid}, cfg.alpha);
        if (!std::isfinite(g_loss)) {
          throw DivergenceError("cgan generator loss non-finite", epoch);
        }
        batch_g_loss += g_loss;

        // d(loss)/d(generated): the hinge path flows through the composite
        // (masked pixels only), the alpha*MSE path is direct
        const masking::PixelMask& pm = s.assignment.pixel_mask;
        const std::size_t plane = pm.height * pm.width;
        std::size_t masked_count = 0;
        for (std::size_t t = 0; t < pm.scenes; ++t) {
          const std::uint8_t* m = pm.scene(t);
          for (std::size_t i = 0; i < plane; ++i) masked_count += m[i];
        }
        const double mse_scale =
            cfg.alpha * 2.0 / static_cast<double>(masked_count * mc_cfg.bands);

        Tensor dgen({img_c, mc_cfg.height, mc_cfg.width});
        for (std::size_t t = 0; t < pm.scenes; ++t) {
          const std::uint8_t* m = pm.scene(t);
          for (std::size_t b = 0; b < mc_cfg.bands; ++b) {
            const std::size_t ch = t * mc_cfg.bands + b;
            const double* hinge1 = din1.data() + (cond_c + ch) * plane;
            const double* hinge2 = din2.data() + (cond_c + ch) * plane;
            const double* gptr = gen_out.data() + ch * plane;
            const double* tptr = s.chip->data.data() + ch * plane;
            double* dptr = dgen.data() + ch * plane;
            for (std::size_t i = 0; i < plane; ++i) {
              if (!m[i]) continue;
              dptr[i] = hinge1[i] + hinge2[i] + mse_scale * (gptr[i] - tptr[i]);
            }
          }
        }
        gen.backward(dgen);

        mae_sum += metrics::mae_masked(gen_out, s.chip->data, pm);
        ssim_sum += metrics::ssim(comp, s.chip->data,
                                  cfg.mode == masking::Mode::E1
                                      ? metrics::SsimScope::E1_center
                                      : metrics::SsimScope::E2_all);
        ++n_scored;
      }
      for (nn::Param* p : gen_params) {
        kern::active().scal(inv_b, p->g.data(), p->g.numel());
      }
      opt_g.step();
      g_loss_sum += batch_g_loss * inv_b;
    }

    stats.d_loss = d_loss_sum / static_cast<double>(n_batches);
    stats.g_loss = g_loss_sum / static_cast<double>(n_batches);
    stats.train_loss = stats.g_loss;
    if (n_scored > 0) {
      stats.train_mae = mae_sum / static_cast<double>(n_scored);
      stats.train_ssim = ssim_sum / static_cast<double>(n_scored);
    }

    const metrics::EvalOutcome val = metrics::evaluate_set(
        val_chips, val_pool, cfg.mode, "cgan", epoch, reconstruct_fn);
    stats.val_mae = val.mean_mae;
    stats.val_ssim = val.mean_ssim;
    stats.skipped += val.skipped;
    result.val_records.insert(result.val_records.end(), val.records.begin(),
                              val.records.end());

    if (!val.records.empty() && val.mean_mae < result.best_val_mae) {
      result.best_val_mae = val.mean_mae;
      result.best_val_ssim = val.mean_ssim;
      result.best_epoch = epoch;
      result.best_gen_weights = nn::snapshot_params(gen_params);
      result.best_disc_weights = nn::snapshot_params(disc_params);
    }
    result.history.push_back(stats);
  }

  if (result.best_gen_weights.empty()) {
    result.best_gen_weights = nn::snapshot_params(gen_params);
    result.best_disc_weights = nn::snapshot_params(disc_params);
    result.best_epoch = cfg.epochs;
  }
  return result;
}

}  // namespace cloudfill::cgan
