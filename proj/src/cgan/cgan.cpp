#include "cloudfill/cgan/cgan.hpp"

#include <algorithm>
#include <cmath>

#include "cloudfill/core/errors.hpp"
#include "cloudfill/io/checkpoint.hpp"
#include "cloudfill/metrics/metrics.hpp"

namespace cloudfill::cgan {

void CganConfig::validate() const {
  if (scenes < 2 || bands == 0) throw ConfigError("invalid scene/band counts");
  if (height % 4 != 0 || width % 4 != 0) {
    throw ConfigError("chip dims must divide by 4 for the generator pyramid");
  }
  if (gen_base == 0 || disc_base == 0) throw ConfigError("zero channel width");
  if (disc_down_stages < 1 || disc_down_stages > 4) {
    throw ConfigError("disc_down_stages must be in [1,4]");
  }
  // the half-scale discriminator must keep a non-degenerate score map
  std::size_t h = height / 2, w = width / 2;
  for (std::size_t s = 0; s < 4; ++s) {
    const std::size_t stride = s < disc_down_stages ? 2 : 1;
    h = nn::Conv2d::out_dim(h, 4, stride, 1);
    w = nn::Conv2d::out_dim(w, 4, stride, 1);
  }
  h = nn::Conv2d::out_dim(h, 4, 1, 1);
  w = nn::Conv2d::out_dim(w, 4, 1, 1);
  if (h == 0 || w == 0) {
    throw ConfigError("discriminator stack collapses the half-scale input; "
                      "reduce disc_down_stages");
  }
}

// ---------------------------------------------------------------------------
// Generator
// ---------------------------------------------------------------------------

Generator::Generator(const CganConfig& cfg, std::uint64_t init_seed) : cfg_(cfg) {
  cfg_.validate();
  Rng rng = Rng(init_seed).derive("cgan/gen");
  const std::size_t g = cfg.gen_base;
  const std::size_t cin = cfg.cond_channels();
  const std::size_t cout = cfg.image_channels();
  e0_.init(cin, g, 3, 1, 1, "gen.e0", rng);
  e1_.init(g, 2 * g, 3, 2, 1, "gen.e1", rng);
  e2_.init(2 * g, 4 * g, 3, 2, 1, "gen.e2", rng);
  mid_.init(4 * g, 4 * g, 3, 1, 1, "gen.mid", rng);
  d2_.init(6 * g, 2 * g, 3, 1, 1, "gen.d2", rng);
  d1_.init(3 * g, g, 3, 1, 1, "gen.d1", rng);
  out_.init(g, cout, 3, 1, 1, "gen.out", rng);
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  if (a.dim(1) != b.dim(1) || a.dim(2) != b.dim(2)) {
    throw DataError("concat_channels spatial mismatch");
  }
  Tensor out({a.dim(0) + b.dim(0), a.dim(1), a.dim(2)});
  std::copy(a.data(), a.data() + a.numel(), out.data());
  std::copy(b.data(), b.data() + b.numel(), out.data() + a.numel());
  return out;
}

namespace {

// split a channel gradient into the [0,c0) and [c0,..) parts
std::pair<Tensor, Tensor> split_channels(const Tensor& d, std::size_t c0) {
  Tensor first({c0, d.dim(1), d.dim(2)});
  Tensor second({d.dim(0) - c0, d.dim(1), d.dim(2)});
  const std::size_t plane = d.dim(1) * d.dim(2);
  std::copy(d.data(), d.data() + c0 * plane, first.data());
  std::copy(d.data() + c0 * plane, d.data() + d.numel(), second.data());
  return {std::move(first), std::move(second)};
}

}  // namespace

Tensor Generator::forward(const Tensor& x) {
  if (x.dim(0) != cfg_.cond_channels() || x.dim(1) != cfg_.height ||
      x.dim(2) != cfg_.width) {
    throw DataError("generator input dims mismatch");
  }
  a0_ = r0_.forward(e0_.forward(x));
  a1_ = r1_.forward(e1_.forward(a0_));
  const Tensor a2 = r2_.forward(e2_.forward(a1_));
  const Tensor m = rm_.forward(mid_.forward(a2));
  const Tensor c2 = concat_channels(up2_.forward(m), a1_);
  const Tensor b2 = rd2_.forward(d2_.forward(c2));
  const Tensor c1 = concat_channels(up1_.forward(b2), a0_);
  const Tensor b1 = rd1_.forward(d1_.forward(c1));
  return out_.forward(b1);
}

Tensor Generator::backward(const Tensor& dy) {
  const std::size_t g = cfg_.gen_base;
  const Tensor db1 = rd1_.backward(out_.backward(dy));
  const Tensor dc1 = d1_.backward(db1);
  auto [du1, da0_skip] = split_channels(dc1, 2 * g);
  const Tensor db2 = rd2_.backward(up1_.backward(du1));
  const Tensor dc2 = d2_.backward(db2);
  auto [du2, da1_skip] = split_channels(dc2, 4 * g);
  const Tensor dm = rm_.backward(up2_.backward(du2));
  const Tensor da2 = r2_.backward(mid_.backward(dm));
  Tensor da1 = e2_.backward(da2);
  nn::add_inplace(da1, da1_skip);
  Tensor da0 = e1_.backward(r1_.backward(da1));
  nn::add_inplace(da0, da0_skip);
  return e0_.backward(r0_.backward(da0));
}

nn::ParamRefs Generator::params() {
  nn::ParamRefs p;
  for (nn::Conv2d* c : {&e0_, &e1_, &e2_, &mid_, &d2_, &d1_, &out_}) {
    nn::append(p, c->params());
  }
  return p;
}

// ---------------------------------------------------------------------------
// PatchDiscriminator
// ---------------------------------------------------------------------------

PatchDiscriminator::PatchDiscriminator(std::size_t in_channels, std::size_t base,
                                       std::size_t down_stages, const std::string& name,
                                       std::uint64_t init_seed) {
  Rng rng = Rng(init_seed).derive("cgan/" + name);
  const std::size_t widths[4] = {base, 2 * base, 4 * base, 4 * base};
  std::size_t c_in = in_channels;
  convs_.resize(5);
  acts_.assign(4, nn::LeakyRelu(0.2));
  for (std::size_t s = 0; s < 4; ++s) {
    const std::size_t stride = s < down_stages ? 2 : 1;
    convs_[s].init(c_in, widths[s], 4, stride, 1, name + ".c" + std::to_string(s), rng);
    c_in = widths[s];
  }
  convs_[4].init(c_in, 1, 4, 1, 1, name + ".head", rng);
}

Tensor PatchDiscriminator::forward(const Tensor& x) {
  Tensor h = x;
  for (std::size_t s = 0; s < 4; ++s) {
    h = acts_[s].forward(convs_[s].forward(h));
  }
  return convs_[4].forward(h);
}

Tensor PatchDiscriminator::backward(const Tensor& dscore) {
  Tensor d = convs_[4].backward(dscore);
  for (std::size_t s = 4; s-- > 0;) {
    d = convs_[s].backward(acts_[s].backward(d));
  }
  return d;
}

nn::ParamRefs PatchDiscriminator::params() {
  nn::ParamRefs p;
  for (nn::Conv2d& c : convs_) nn::append(p, c.params());
  return p;
}

namespace {

// any-pool of a binary map through one conv geometry (padding is clear sky)
std::vector<std::uint8_t> any_pool(const std::vector<std::uint8_t>& m, std::size_t h,
                                   std::size_t w, std::size_t k, std::size_t stride,
                                   std::size_t pad, std::size_t& oh, std::size_t& ow) {
  oh = nn::Conv2d::out_dim(h, k, stride, pad);
  ow = nn::Conv2d::out_dim(w, k, stride, pad);
  std::vector<std::uint8_t> out(oh * ow, 0);
  for (std::size_t oi = 0; oi < oh; ++oi) {
    for (std::size_t oj = 0; oj < ow; ++oj) {
      std::uint8_t v = 0;
      for (std::size_t ki = 0; ki < k && !v; ++ki) {
        const std::ptrdiff_t r =
            static_cast<std::ptrdiff_t>(oi * stride + ki) - static_cast<std::ptrdiff_t>(pad);
        if (r < 0 || r >= static_cast<std::ptrdiff_t>(h)) continue;
        for (std::size_t kj = 0; kj < k; ++kj) {
          const std::ptrdiff_t c =
              static_cast<std::ptrdiff_t>(oj * stride + kj) - static_cast<std::ptrdiff_t>(pad);
          if (c < 0 || c >= static_cast<std::ptrdiff_t>(w)) continue;
          if (m[static_cast<std::size_t>(r) * w + static_cast<std::size_t>(c)]) {
            v = 1;
            break;
          }
        }
      }
      out[oi * ow + oj] = v;
    }
  }
  return out;
}

}  // namespace

std::vector<std::uint8_t> any_pool2(const std::vector<std::uint8_t>& mask,
                                    std::size_t h, std::size_t w) {
  if (h % 2 != 0 || w % 2 != 0) throw DataError("any_pool2 requires even dims");
  std::size_t oh = 0, ow = 0;
  return any_pool(mask, h, w, 2, 2, 0, oh, ow);
}

std::vector<std::uint8_t> PatchDiscriminator::lift_validity(
    const std::vector<std::uint8_t>& mask, std::size_t h, std::size_t w) const {
  std::vector<std::uint8_t> v = mask;
  std::size_t ch = h, cw = w;
  for (const nn::Conv2d& conv : convs_) {
    std::size_t oh = 0, ow = 0;
    v = any_pool(v, ch, cw, conv.k, conv.stride, conv.pad, oh, ow);
    ch = oh;
    cw = ow;
  }
  return v;
}

// ---------------------------------------------------------------------------
// CganModel
// ---------------------------------------------------------------------------

CganModel::CganModel(CganConfig cfg, std::uint64_t init_seed)
    : cfg_(cfg),
      gen_(cfg, init_seed),
      d_full_(cfg.disc_in_channels(), cfg.disc_base, cfg.disc_down_stages, "d1",
              init_seed),
      d_half_(cfg.disc_in_channels(), cfg.disc_base, cfg.disc_down_stages, "d2",
              init_seed) {}

nn::ParamRefs CganModel::disc_params() {
  nn::ParamRefs p = d_full_.params();
  nn::append(p, d_half_.params());
  return p;
}

// ---------------------------------------------------------------------------
// stacking helpers and the spec-level ops
// ---------------------------------------------------------------------------

Tensor flatten_scenes(const Tensor& tbhw) {
  Tensor out({tbhw.dim(0) * tbhw.dim(1), tbhw.dim(2), tbhw.dim(3)});
  std::copy(tbhw.data(), tbhw.data() + tbhw.numel(), out.data());
  return out;
}

Tensor unflatten_scenes(const Tensor& chw, std::size_t scenes, std::size_t bands) {
  if (chw.dim(0) != scenes * bands) throw DataError("unflatten channel mismatch");
  Tensor out({scenes, bands, chw.dim(1), chw.dim(2)});
  std::copy(chw.data(), chw.data() + chw.numel(), out.data());
  return out;
}

Tensor stack_condition(const MaskedChip& mc) {
  const Tensor& d = mc.masked_data;
  const PixelMask& pm = mc.assignment.pixel_mask;
  const std::size_t t_n = d.dim(0), b_n = d.dim(1), h = d.dim(2), w = d.dim(3);
  Tensor out({t_n * b_n + t_n, h, w});
  std::copy(d.data(), d.data() + d.numel(), out.data());
  double* mplanes = out.data() + d.numel();
  for (std::size_t i = 0; i < pm.v.size(); ++i) {
    mplanes[i] = static_cast<double>(pm.v[i]);
  }
  return out;
}

Tensor generate(Generator& gen, const MaskedChip& mc) {
  const Tensor y = gen.forward(stack_condition(mc));
  return unflatten_scenes(y, mc.masked_data.dim(0), mc.masked_data.dim(1));
}

namespace {

void check_scores(const std::vector<Tensor>& scores,
                  const std::vector<std::vector<std::uint8_t>>& valid) {
  if (scores.size() != valid.size() || scores.empty()) {
    throw DataError("score/validity scale count mismatch");
  }
  for (std::size_t s = 0; s < scores.size(); ++s) {
    if (scores[s].numel() != valid[s].size()) {
      throw DataError("score map does not match validity mask");
    }
  }
}

std::size_t valid_count(const std::vector<std::uint8_t>& v) {
  std::size_t n = 0;
  for (std::uint8_t b : v) n += b;
  return n;
}

}  // namespace

double hinge_d_loss(const std::vector<Tensor>& real_scores,
                    const std::vector<Tensor>& fake_scores,
                    const std::vector<std::vector<std::uint8_t>>& valid) {
  check_scores(real_scores, valid);
  check_scores(fake_scores, valid);
  double acc = 0.0;
  for (std::size_t s = 0; s < valid.size(); ++s) {
    const std::size_t n = valid_count(valid[s]);
    if (n == 0) throw DataError("no valid discriminator patches at scale " + std::to_string(s));
    double scale_acc = 0.0;
    for (std::size_t i = 0; i < valid[s].size(); ++i) {
      if (!valid[s][i]) continue;
      scale_acc += std::max(0.0, 1.0 - real_scores[s][i]) +
                   std::max(0.0, 1.0 + fake_scores[s][i]);
    }
    acc += scale_acc / static_cast<double>(n);
  }
  return acc / static_cast<double>(valid.size());
}

double hinge_g_loss(const std::vector<Tensor>& fake_scores,
                    const std::vector<std::vector<std::uint8_t>>& valid) {
  check_scores(fake_scores, valid);
  double acc = 0.0;
  for (std::size_t s = 0; s < valid.size(); ++s) {
    const std::size_t n = valid_count(valid[s]);
    if (n == 0) throw DataError("no valid discriminator patches at scale " + std::to_string(s));
    double scale_acc = 0.0;
    for (std::size_t i = 0; i < valid[s].size(); ++i) {
      if (valid[s][i]) scale_acc += fake_scores[s][i];
    }
    acc += -scale_acc / static_cast<double>(n);
  }
  return acc / static_cast<double>(valid.size());
}

double masked_mse(const Tensor& generated, const Tensor& truth, const PixelMask& mask) {
  return metrics::masked_mse(generated, truth, mask);
}

double total_g_loss(const Tensor& generated, const Tensor& truth,
                    const std::vector<Tensor>& fake_scores, const PixelMask& mask,
                    const std::vector<std::vector<std::uint8_t>>& valid, double alpha) {
  return hinge_g_loss(fake_scores, valid) + alpha * masked_mse(generated, truth, mask);
}

// ---------------------------------------------------------------------------
// checkpointing
// ---------------------------------------------------------------------------

void save_checkpoint(CganModel& model, const std::filesystem::path& path,
                     std::uint32_t epoch, double val_mae) {
  const CganConfig& c = model.config();
  ckpt::Checkpoint ck;
  ck.magic = "CGNC";
  ck.config = {
      {"scenes", static_cast<double>(c.scenes)},
      {"bands", static_cast<double>(c.bands)},
      {"height", static_cast<double>(c.height)},
      {"width", static_cast<double>(c.width)},
      {"gen_base", static_cast<double>(c.gen_base)},
      {"disc_base", static_cast<double>(c.disc_base)},
      {"disc_down_stages", static_cast<double>(c.disc_down_stages)},
  };
  for (nn::Param* p : model.gen_params()) ck.arrays.emplace_back(p->name, p->w);
  for (nn::Param* p : model.disc_params()) ck.arrays.emplace_back(p->name, p->w);
  ck.epoch = epoch;
  ck.val_mae = val_mae;
  ckpt::write_checkpoint(ck, path);
}

CganModel load_checkpoint(const std::filesystem::path& path) {
  const ckpt::Checkpoint ck = ckpt::read_checkpoint(path, "CGNC");
  CganConfig c;
  c.scenes = static_cast<std::size_t>(ck.config_value("scenes"));
  c.bands = static_cast<std::size_t>(ck.config_value("bands"));
  c.height = static_cast<std::size_t>(ck.config_value("height"));
  c.width = static_cast<std::size_t>(ck.config_value("width"));
  c.gen_base = static_cast<std::size_t>(ck.config_value("gen_base"));
  c.disc_base = static_cast<std::size_t>(ck.config_value("disc_base"));
  c.disc_down_stages = static_cast<std::size_t>(ck.config_value("disc_down_stages"));
  CganModel model(c, 0);
  for (nn::Param* p : model.gen_params()) {
    const Tensor& arr = ck.array(p->name);
    if (arr.shape() != p->w.shape()) {
      throw DataError("checkpoint array '" + p->name + "' has wrong shape");
    }
    p->w = arr;
  }
  for (nn::Param* p : model.disc_params()) {
    const Tensor& arr = ck.array(p->name);
    if (arr.shape() != p->w.shape()) {
      throw DataError("checkpoint array '" + p->name + "' has wrong shape");
    }
    p->w = arr;
  }
  return model;
}

}  // namespace cloudfill::cgan
