#include "cloudfill/chipstore/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "cloudfill/core/errors.hpp"
#include "cloudfill/core/rng.hpp"

namespace cloudfill::chipstore {

namespace {

std::string indexed_id(char prefix, std::uint64_t seed, std::size_t i) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%c%llu_%05zu", prefix,
                static_cast<unsigned long long>(seed), i);
  return buf;
}

// bilinear upsample of a g x g grid to h x w
std::vector<double> smooth_field(Rng& rng, std::size_t grid, std::size_t h,
                                 std::size_t w, double lo, double hi) {
  std::vector<double> g(grid * grid);
  for (double& v : g) v = rng.uniform(lo, hi);
  std::vector<double> out(h * w);
  for (std::size_t r = 0; r < h; ++r) {
    const double fy = (h == 1) ? 0.0
                               : static_cast<double>(r) * (grid - 1) / (h - 1);
    const std::size_t y0 = std::min(static_cast<std::size_t>(fy), grid - 2);
    const double ty = fy - static_cast<double>(y0);
    for (std::size_t c = 0; c < w; ++c) {
      const double fx = (w == 1) ? 0.0
                                 : static_cast<double>(c) * (grid - 1) / (w - 1);
      const std::size_t x0 = std::min(static_cast<std::size_t>(fx), grid - 2);
      const double tx = fx - static_cast<double>(x0);
      const double v00 = g[y0 * grid + x0];
      const double v01 = g[y0 * grid + x0 + 1];
      const double v10 = g[(y0 + 1) * grid + x0];
      const double v11 = g[(y0 + 1) * grid + x0 + 1];
      out[r * w + c] = v00 * (1 - ty) * (1 - tx) + v01 * (1 - ty) * tx +
                       v10 * ty * (1 - tx) + v11 * ty * tx;
    }
  }
  return out;
}

}  // namespace

std::vector<Chip> generate_synthetic_chips(std::size_t count, std::size_t height,
                                           std::size_t width, std::uint64_t seed,
                                           const SyntheticChipConfig& cfg) {
  if (count < 1) throw ConfigError("chip count must be >= 1");
  if (height < 16 || width < 16) {
    throw ConfigError("chip dims must be >= 16");
  }
  if (height % cfg.patch_align != 0 || width % cfg.patch_align != 0) {
    throw ConfigError("chip dims must be divisible by the patch size " +
                      std::to_string(cfg.patch_align));
  }
  if (cfg.noise_amplitude > 0.02) {
    throw ConfigError("noise amplitude above the 0.02 cap");
  }

  const Rng base = Rng(seed).derive("chipgen");
  std::vector<Chip> chips;
  chips.reserve(count);

  for (std::size_t i = 0; i < count; ++i) {
    Rng rng = base.derive(i);
    Chip chip;
    chip.id = indexed_id('c', seed, i);
    chip.scenes = cfg.scenes;
    chip.bands = cfg.bands;
    chip.height = height;
    chip.width = width;
    chip.data = Tensor({cfg.scenes, cfg.bands, height, width});

    // persistent land-cover regions: nearest of K random sites
    const std::size_t sites = 6 + rng.uniform_int(5);
    std::vector<double> sx(sites), sy(sites), base_level(sites);
    for (std::size_t s = 0; s < sites; ++s) {
      sx[s] = rng.uniform(0.0, static_cast<double>(width));
      sy[s] = rng.uniform(0.0, static_cast<double>(height));
      base_level[s] = rng.uniform(0.06, 0.28);
    }
    std::vector<std::size_t> region(height * width);
    for (std::size_t r = 0; r < height; ++r) {
      for (std::size_t c = 0; c < width; ++c) {
        double best = 1e30;
        std::size_t arg = 0;
        for (std::size_t s = 0; s < sites; ++s) {
          const double dx = static_cast<double>(c) + 0.5 - sx[s];
          const double dy = static_cast<double>(r) + 0.5 - sy[s];
          const double d = dx * dx + dy * dy;
          if (d < best) {
            best = d;
            arg = s;
          }
        }
        region[r * width + c] = arg;
      }
    }

    // spectral structure: shared per-band offset plus per-region jitter
    std::vector<double> band_offset(cfg.bands);
    for (double& v : band_offset) v = rng.uniform(-0.04, 0.04);
    std::vector<double> band_jitter(sites * cfg.bands);
    for (double& v : band_jitter) v = rng.uniform(-0.02, 0.02);

    // per-scene smooth brightness drift
    std::vector<std::vector<double>> drift(cfg.scenes);
    for (auto& d : drift) {
      d = smooth_field(rng, 4, height, width, -cfg.drift_amplitude,
                       cfg.drift_amplitude);
    }

    chip.dates.resize(cfg.scenes);
    chip.dates[0] = 19052 + static_cast<std::uint32_t>(rng.uniform_int(60));
    for (std::size_t t = 1; t < cfg.scenes; ++t) {
      chip.dates[t] = chip.dates[t - 1] + 1 + static_cast<std::uint32_t>(rng.uniform_int(200));
    }

    const double a = cfg.noise_amplitude;
    for (std::size_t t = 0; t < cfg.scenes; ++t) {
      for (std::size_t b = 0; b < cfg.bands; ++b) {
        for (std::size_t r = 0; r < height; ++r) {
          for (std::size_t c = 0; c < width; ++c) {
            const std::size_t reg = region[r * width + c];
            double v = base_level[reg] + band_offset[b] +
                       band_jitter[reg * cfg.bands + b] + drift[t][r * width + c] +
                       rng.uniform(-a, a);
            v = std::clamp(v, 0.0, 1.0);
            // quantize to float32 so the CHP1 round-trip is bit-exact
            chip.at(t, b, r, c) = static_cast<double>(static_cast<float>(v));
          }
        }
      }
    }
    chips.push_back(std::move(chip));
  }
  return chips;
}

std::vector<CloudMask> generate_synthetic_masks(std::size_t count, std::size_t height,
                                                std::size_t width, std::uint64_t seed) {
  if (count < 10) throw ConfigError("mask count must be >= 10");

  const Rng base = Rng(seed).derive("maskgen");
  const std::size_t n_px = height * width;
  std::vector<CloudMask> masks;
  masks.reserve(count);

  for (std::size_t i = 0; i < count; ++i) {
    Rng rng = base.derive(i);
    // stratified target coverage: cycles through the 10 deciles
    const double target = (static_cast<double>(i % 10) + rng.uniform()) / 10.0;
    const std::size_t k = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(target * static_cast<double>(n_px))),
        1, n_px);

    const std::size_t grid = 5 + rng.uniform_int(4);
    std::vector<double> field = smooth_field(rng, grid, height, width, 0.0, 1.0);

    // exact-k threshold: top k field values become cloudy, ties by index
    std::vector<std::size_t> order(n_px);
    for (std::size_t j = 0; j < n_px; ++j) order[j] = j;
    std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k - 1),
                     order.end(), [&](std::size_t lhs, std::size_t rhs) {
                       if (field[lhs] != field[rhs]) return field[lhs] > field[rhs];
                       return lhs < rhs;
                     });
    std::vector<std::uint8_t> px(n_px, 0);
    for (std::size_t j = 0; j < k; ++j) px[order[j]] = 1;

    masks.push_back(CloudMask::from_pixels(indexed_id('m', seed, i), height, width,
                                           std::move(px)));
  }
  return masks;
}

}  // namespace cloudfill::chipstore
