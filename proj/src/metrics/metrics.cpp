#include "cloudfill/metrics/metrics.hpp"

#include <cmath>
#include <limits>

#include "cloudfill/core/errors.hpp"
#include "cloudfill/kernels/kernels.hpp"

namespace cloudfill::metrics {

namespace {

void check_dims(const Tensor& generated, const Tensor& truth, const PixelMask& mask) {
  if (!generated.same_shape(truth)) throw DataError("generated/truth shape mismatch");
  if (generated.ndim() != 4 || generated.dim(0) != mask.scenes ||
      generated.dim(2) != mask.height || generated.dim(3) != mask.width) {
    throw DataError("pixel mask does not match data dims");
  }
}

}  // namespace

Tensor composite(const Tensor& generated, const Tensor& truth, const PixelMask& mask) {
  check_dims(generated, truth, mask);
  const std::size_t b_n = truth.dim(1);
  Tensor out = truth;
  for (std::size_t t = 0; t < mask.scenes; ++t) {
    for (std::size_t r = 0; r < mask.height; ++r) {
      for (std::size_t c = 0; c < mask.width; ++c) {
        if (mask.at(t, r, c)) {
          for (std::size_t b = 0; b < b_n; ++b) {
            out.at4(t, b, r, c) = generated.at4(t, b, r, c);
          }
        }
      }
    }
  }
  return out;
}

namespace {

// pooled masked-pixel reduction across all bands of every scene
double masked_err(const Tensor& generated, const Tensor& truth, const PixelMask& mask,
                  bool squared) {
  check_dims(generated, truth, mask);
  const std::size_t b_n = truth.dim(1);
  const std::size_t plane = mask.height * mask.width;
  const auto& k = kern::active();
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t t = 0; t < mask.scenes; ++t) {
    const std::uint8_t* m = mask.scene(t);
    std::size_t scene_count = 0;
    for (std::size_t i = 0; i < plane; ++i) scene_count += m[i];
    if (scene_count == 0) continue;
    count += scene_count * b_n;
    for (std::size_t b = 0; b < b_n; ++b) {
      const double* g = generated.data() + (t * b_n + b) * plane;
      const double* tr = truth.data() + (t * b_n + b) * plane;
      sum += squared ? k.masked_sq_err(g, tr, m, plane) : k.masked_abs_err(g, tr, m, plane);
    }
  }
  if (count == 0) throw DataError("no masked pixels to score");
  return sum / static_cast<double>(count);
}

}  // namespace

double mae_masked(const Tensor& generated, const Tensor& truth, const PixelMask& mask) {
  return masked_err(generated, truth, mask, false);
}

double masked_mse(const Tensor& generated, const Tensor& truth, const PixelMask& mask) {
  return masked_err(generated, truth, mask, true);
}

Tensor baseline_impute(const MaskedChip& mc, const std::vector<std::uint32_t>& dates,
                       BaselineStrategy strategy) {
  const PixelMask& pm = mc.assignment.pixel_mask;
  const std::size_t t_n = pm.scenes, b_n = mc.masked_data.dim(1);
  const std::size_t h = pm.height, w = pm.width;
  if (dates.size() != t_n) throw DataError("baseline: dates/scenes mismatch");
  Tensor out = mc.masked_data;
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      for (std::size_t t = 0; t < t_n; ++t) {
        if (!pm.at(t, r, c)) continue;
        if (strategy == BaselineStrategy::copy_nearest_scene) {
          // nearest unmasked scene by date gap; ties go to the earlier scene
          std::size_t best = t_n;
          std::uint32_t best_gap = std::numeric_limits<std::uint32_t>::max();
          for (std::size_t s = 0; s < t_n; ++s) {
            if (pm.at(s, r, c)) continue;
            const std::uint32_t gap =
                dates[s] > dates[t] ? dates[s] - dates[t] : dates[t] - dates[s];
            if (gap < best_gap) {
              best_gap = gap;
              best = s;
            }
          }
          for (std::size_t b = 0; b < b_n; ++b) {
            out.at4(t, b, r, c) =
                best == t_n ? 0.15 : mc.masked_data.at4(best, b, r, c);
          }
        } else {
          std::size_t n_src = 0;
          for (std::size_t s = 0; s < t_n; ++s) {
            if (!pm.at(s, r, c)) ++n_src;
          }
          for (std::size_t b = 0; b < b_n; ++b) {
            if (n_src == 0) {
              out.at4(t, b, r, c) = 0.15;
              continue;
            }
            double acc = 0.0;
            for (std::size_t s = 0; s < t_n; ++s) {
              if (!pm.at(s, r, c)) acc += mc.masked_data.at4(s, b, r, c);
            }
            out.at4(t, b, r, c) = acc / static_cast<double>(n_src);
          }
        }
      }
    }
  }
  return out;
}

const std::array<const char*, 4>& CorrelationReport::field_names() {
  static const std::array<const char*, 4> names{"coverage", "max_gap_days",
                                                "mae_masked", "ssim"};
  return names;
}

CorrelationReport correlation_report(const std::vector<MetricsRecord>& records) {
  std::array<std::vector<double>, 4> cols;
  for (const MetricsRecord& rec : records) {
    cols[0].push_back(rec.coverage);
    cols[1].push_back(static_cast<double>(rec.max_gap_days));
    cols[2].push_back(rec.mae_masked);
    cols[3].push_back(rec.ssim);
  }
  CorrelationReport rep;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      // pairwise-complete rows
      double sx = 0, sy = 0;
      std::size_t n = 0;
      for (std::size_t k = 0; k < cols[i].size(); ++k) {
        if (std::isfinite(cols[i][k]) && std::isfinite(cols[j][k])) {
          sx += cols[i][k];
          sy += cols[j][k];
          ++n;
        }
      }
      if (n < 2) {
        rep.r[i][j] = nan;
        rep.defined[i][j] = false;
        continue;
      }
      const double mx = sx / static_cast<double>(n);
      const double my = sy / static_cast<double>(n);
      double vxx = 0, vyy = 0, vxy = 0;
      for (std::size_t k = 0; k < cols[i].size(); ++k) {
        if (std::isfinite(cols[i][k]) && std::isfinite(cols[j][k])) {
          const double dx = cols[i][k] - mx;
          const double dy = cols[j][k] - my;
          vxx += dx * dx;
          vyy += dy * dy;
          vxy += dx * dy;
        }
      }
      if (vxx == 0.0 || vyy == 0.0) {
        rep.r[i][j] = nan;
        rep.defined[i][j] = false;
      } else if (i == j) {
        rep.r[i][j] = 1.0;
        rep.defined[i][j] = true;
      } else {
        rep.r[i][j] = vxy / std::sqrt(vxx * vyy);
        rep.defined[i][j] = true;
      }
    }
  }
  return rep;
}

namespace {

BandCorrMatrix pearson_channels(const std::vector<std::vector<double>>& samples) {
  const std::size_t ch = samples.size();
  BandCorrMatrix m;
  m.channels = ch;
  m.r.assign(ch * ch, std::numeric_limits<double>::quiet_NaN());
  m.defined.assign(ch * ch, 0);
  const std::size_t n = ch == 0 ? 0 : samples[0].size();
  if (n < 2) return m;

  std::vector<double> mean(ch, 0.0), var(ch, 0.0);
  for (std::size_t i = 0; i < ch; ++i) {
    for (double v : samples[i]) mean[i] += v;
    mean[i] /= static_cast<double>(n);
    for (double v : samples[i]) {
      const double d = v - mean[i];
      var[i] += d * d;
    }
  }
  for (std::size_t i = 0; i < ch; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      if (var[i] == 0.0 || var[j] == 0.0) continue;
      double cov = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        cov += (samples[i][k] - mean[i]) * (samples[j][k] - mean[j]);
      }
      double r = i == j ? 1.0 : cov / std::sqrt(var[i] * var[j]);
      m.r[i * ch + j] = r;
      m.r[j * ch + i] = r;
      m.defined[i * ch + j] = 1;
      m.defined[j * ch + i] = 1;
    }
  }
  return m;
}

}  // namespace

void BandCorrAccumulator::add(const Tensor& values, const PixelMask& mask) {
  const std::size_t t_n = values.dim(0), b_n = values.dim(1);
  const std::size_t h = values.dim(2), w = values.dim(3);
  if (t_n != mask.scenes || h != mask.height || w != mask.width) {
    throw DataError("band correlation dims mismatch");
  }
  if (channels_ == 0) {
    channels_ = t_n * b_n;
    samples_.assign(channels_, {});
  } else if (channels_ != t_n * b_n) {
    throw DataError("band correlation channel count changed between chips");
  }
  const std::vector<std::uint8_t> footprint = mask.scene_union();
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      if (!footprint[r * w + c]) continue;
      for (std::size_t t = 0; t < t_n; ++t) {
        for (std::size_t b = 0; b < b_n; ++b) {
          samples_[t * b_n + b].push_back(values.at4(t, b, r, c));
        }
      }
    }
  }
}

BandCorrMatrix BandCorrAccumulator::finalize() const { return pearson_channels(samples_); }

BandCorrMatrix band_correlation(const Tensor& values, const PixelMask& mask) {
  BandCorrAccumulator acc;
  acc.add(values, mask);
  return acc.finalize();
}

double chip_coverage(const PixelMask& mask) {
  const std::size_t plane = mask.height * mask.width;
  std::size_t masked_px = 0;
  std::size_t masked_scenes = 0;
  for (std::size_t t = 0; t < mask.scenes; ++t) {
    const std::uint8_t* m = mask.scene(t);
    std::size_t n = 0;
    for (std::size_t i = 0; i < plane; ++i) n += m[i];
    if (n > 0) {
      ++masked_scenes;
      masked_px += n;
    }
  }
  if (masked_scenes == 0) return 0.0;
  return static_cast<double>(masked_px) / static_cast<double>(masked_scenes * plane);
}

}  // namespace cloudfill::metrics
