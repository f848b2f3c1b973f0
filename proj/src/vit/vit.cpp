#include "cloudfill/vit/vit.hpp"

#include <cmath>
#include <unordered_map>

#include "cloudfill/core/errors.hpp"
#include "cloudfill/io/checkpoint.hpp"

namespace cloudfill::vit {

namespace {

// positional dims: one quarter for the scene index, the rest split evenly
// between row and column; every part must be even for the sin/cos pairs
struct PosSplit {
  std::size_t d_t, d_h, d_w;
};

PosSplit pos_split(std::size_t dim) {
  PosSplit s;
  s.d_t = dim / 4;
  s.d_h = (dim - s.d_t) / 2;
  s.d_w = dim - s.d_t - s.d_h;
  return s;
}

bool pos_split_valid(std::size_t dim) {
  const PosSplit s = pos_split(dim);
  return s.d_h == s.d_w && s.d_t % 2 == 0 && s.d_h % 2 == 0 && s.d_t > 0;
}

void sub_inplace(Tensor& a, const Tensor& b) {
  for (std::size_t i = 0; i < a.numel(); ++i) a[i] -= b[i];
}

void write_sincos(double* out, std::size_t dim, double pos) {
  const std::size_t half = dim / 2;
  for (std::size_t i = 0; i < half; ++i) {
    const double freq =
        1.0 / std::pow(10000.0, static_cast<double>(i) / static_cast<double>(half));
    out[2 * i] = std::sin(pos * freq);
    out[2 * i + 1] = std::cos(pos * freq);
  }
}

}  // namespace

void ViTConfig::validate() const {
  if (patch == 0 || height % patch != 0 || width % patch != 0) {
    throw ConfigError("chip dims must divide by the patch size " + std::to_string(patch));
  }
  if (height < 16 || width < 16) throw ConfigError("chip dims must be >= 16");
  if (embed_dim == 0 || enc_heads == 0 || embed_dim % enc_heads != 0) {
    throw ConfigError("embed_dim must divide by enc_heads");
  }
  if (dec_dim == 0 || dec_heads == 0 || dec_dim % dec_heads != 0) {
    throw ConfigError("dec_dim must divide by dec_heads");
  }
  if (!pos_split_valid(embed_dim) || !pos_split_valid(dec_dim)) {
    throw ConfigError("embedding dims incompatible with the 3D sin-cos split");
  }
  if (scenes < 2 || bands == 0 || mlp_ratio == 0) {
    throw ConfigError("invalid model dims");
  }
}

Tensor sincos_position_table(const ViTConfig& cfg, std::size_t dim) {
  const PosSplit s = pos_split(dim);
  Tensor table({cfg.n_patches(), dim});
  const std::size_t gh = cfg.grid_h(), gw = cfg.grid_w();
  for (std::size_t t = 0; t < cfg.scenes; ++t) {
    for (std::size_t gi = 0; gi < gh; ++gi) {
      for (std::size_t gj = 0; gj < gw; ++gj) {
        double* row = table.data() + ((t * gh + gi) * gw + gj) * dim;
        write_sincos(row, s.d_t, static_cast<double>(t));
        write_sincos(row + s.d_t, s.d_h, static_cast<double>(gi));
        write_sincos(row + s.d_t + s.d_h, s.d_w, static_cast<double>(gj));
      }
    }
  }
  return table;
}

Tensor patch_matrix(const Tensor& data, std::size_t patch) {
  const std::size_t t_n = data.dim(0), b_n = data.dim(1);
  const std::size_t h = data.dim(2), w = data.dim(3);
  if (h % patch != 0 || w % patch != 0) {
    throw ConfigError("dims not divisible by patch size");
  }
  const std::size_t gh = h / patch, gw = w / patch;
  const std::size_t plen = patch * patch * b_n;
  Tensor out({t_n * gh * gw, plen});
  for (std::size_t t = 0; t < t_n; ++t) {
    for (std::size_t gi = 0; gi < gh; ++gi) {
      for (std::size_t gj = 0; gj < gw; ++gj) {
        double* row = out.data() + ((t * gh + gi) * gw + gj) * plen;
        std::size_t k = 0;
        for (std::size_t b = 0; b < b_n; ++b) {
          for (std::size_t r = 0; r < patch; ++r) {
            for (std::size_t c = 0; c < patch; ++c) {
              row[k++] = data.at4(t, b, gi * patch + r, gj * patch + c);
            }
          }
        }
      }
    }
  }
  return out;
}

Tensor unpatchify(const Tensor& patches, std::size_t scenes, std::size_t bands,
                  std::size_t height, std::size_t width, std::size_t patch) {
  const std::size_t gh = height / patch, gw = width / patch;
  const std::size_t plen = patch * patch * bands;
  if (patches.rows() != scenes * gh * gw || patches.cols() != plen) {
    throw DataError("unpatchify shape mismatch");
  }
  Tensor out({scenes, bands, height, width});
  for (std::size_t t = 0; t < scenes; ++t) {
    for (std::size_t gi = 0; gi < gh; ++gi) {
      for (std::size_t gj = 0; gj < gw; ++gj) {
        const double* row = patches.data() + ((t * gh + gi) * gw + gj) * plen;
        std::size_t k = 0;
        for (std::size_t b = 0; b < bands; ++b) {
          for (std::size_t r = 0; r < patch; ++r) {
            for (std::size_t c = 0; c < patch; ++c) {
              out.at4(t, b, gi * patch + r, gj * patch + c) = row[k++];
            }
          }
        }
      }
    }
  }
  return out;
}

PatchSet patchify(const MaskedChip& mc, std::size_t patch) {
  const Tensor& data = mc.masked_data;
  const std::size_t t_n = data.dim(0), b_n = data.dim(1);
  const std::size_t h = data.dim(2), w = data.dim(3);
  const std::vector<std::uint8_t> pm =
      masking::lift_to_patch_mask(mc.assignment.pixel_mask, patch);
  const std::size_t gh = h / patch, gw = w / patch;
  const std::size_t plen = patch * patch * b_n;

  PatchSet ps;
  for (std::size_t n = 0; n < pm.size(); ++n) {
    (pm[n] ? ps.masked : ps.visible).push_back(n);
  }
  // tokens are read from visible patches only; dropped patches are never
  // touched, so their pixel values cannot influence the reconstruction
  ps.tokens = Tensor({ps.visible.size(), plen});
  for (std::size_t i = 0; i < ps.visible.size(); ++i) {
    const std::size_t n = ps.visible[i];
    const std::size_t t = n / (gh * gw);
    const std::size_t gi = (n / gw) % gh;
    const std::size_t gj = n % gw;
    double* row = ps.tokens.data() + i * plen;
    std::size_t k = 0;
    for (std::size_t b = 0; b < b_n; ++b) {
      for (std::size_t r = 0; r < patch; ++r) {
        for (std::size_t c = 0; c < patch; ++c) {
          row[k++] = data.at4(t, b, gi * patch + r, gj * patch + c);
        }
      }
    }
  }
  return ps;
}

double mse_masked_patches(const Tensor& reconstruction, const Tensor& truth,
                          const std::vector<std::uint8_t>& patch_mask,
                          std::size_t patch) {
  if (!reconstruction.same_shape(truth)) throw DataError("mse shape mismatch");
  const std::size_t b_n = truth.dim(1);
  const std::size_t h = truth.dim(2), w = truth.dim(3);
  const std::size_t gh = h / patch, gw = w / patch;
  if (patch_mask.size() != truth.dim(0) * gh * gw) {
    throw DataError("patch mask size mismatch");
  }
  double acc = 0.0;
  std::size_t n_masked = 0;
  for (std::size_t n = 0; n < patch_mask.size(); ++n) {
    if (!patch_mask[n]) continue;
    ++n_masked;
    const std::size_t t = n / (gh * gw);
    const std::size_t gi = (n / gw) % gh;
    const std::size_t gj = n % gw;
    for (std::size_t b = 0; b < b_n; ++b) {
      for (std::size_t r = 0; r < patch; ++r) {
        for (std::size_t c = 0; c < patch; ++c) {
          const double d = reconstruction.at4(t, b, gi * patch + r, gj * patch + c) -
                           truth.at4(t, b, gi * patch + r, gj * patch + c);
          acc += d * d;
        }
      }
    }
  }
  if (n_masked == 0) throw DataError("no masked patches to score");
  return acc / static_cast<double>(n_masked * patch * patch * b_n);
}

ViTModel::ViTModel(ViTConfig cfg, std::uint64_t init_seed) : cfg_(cfg) {
  cfg_.validate();
  Rng rng = Rng(init_seed).derive("vit/init");
  patch_embed_.init(cfg_.patch_len(), cfg_.embed_dim, "patch_embed", rng);
  enc_blocks_.resize(cfg_.enc_depth);
  for (std::size_t i = 0; i < cfg_.enc_depth; ++i) {
    enc_blocks_[i].init(cfg_.embed_dim, cfg_.enc_heads, cfg_.embed_dim * cfg_.mlp_ratio,
                        "enc" + std::to_string(i), rng);
  }
  enc_norm_.init(cfg_.embed_dim, "enc_norm");
  dec_embed_.init(cfg_.embed_dim, cfg_.dec_dim, "dec_embed", rng);
  mask_token_.init("mask_token", {cfg_.dec_dim});
  for (std::size_t i = 0; i < mask_token_.w.numel(); ++i) {
    mask_token_.w[i] = 0.02 * rng.normal();
  }
  dec_blocks_.resize(cfg_.dec_depth);
  for (std::size_t i = 0; i < cfg_.dec_depth; ++i) {
    dec_blocks_[i].init(cfg_.dec_dim, cfg_.dec_heads, cfg_.dec_dim * cfg_.mlp_ratio,
                        "dec" + std::to_string(i), rng);
  }
  dec_norm_.init(cfg_.dec_dim, "dec_norm");
  head_.init(cfg_.dec_dim, cfg_.patch_len(), "head", rng);
  enc_pos_ = sincos_position_table(cfg_, cfg_.embed_dim);
  dec_pos_ = sincos_position_table(cfg_, cfg_.dec_dim);
}

Tensor ViTModel::reconstruct(const MaskedChip& mc,
                             const std::vector<std::size_t>* dec_order) {
  const Tensor& data = mc.masked_data;
  if (data.dim(0) != cfg_.scenes || data.dim(1) != cfg_.bands ||
      data.dim(2) != cfg_.height || data.dim(3) != cfg_.width) {
    throw DataError("chip dims do not match model config");
  }
  PatchSet ps = patchify(mc, cfg_.patch);
  if (ps.visible.empty()) {
    throw DataError("fully-masked input: no visible patches for chip " + mc.chip_id);
  }
  visible_ = ps.visible;
  masked_ = ps.masked;
  patch_mask_.assign(cfg_.n_patches(), 0);
  for (std::size_t n : masked_) patch_mask_[n] = 1;

  const std::size_t nv = visible_.size();
  const std::size_t total = cfg_.n_patches();
  const std::size_t dd = cfg_.dec_dim;

  // encoder over visible tokens
  Tensor enc_in = patch_embed_.forward(ps.tokens);
  for (std::size_t i = 0; i < nv; ++i) {
    const double* pos = enc_pos_.data() + visible_[i] * cfg_.embed_dim;
    double* row = enc_in.data() + i * cfg_.embed_dim;
    for (std::size_t j = 0; j < cfg_.embed_dim; ++j) row[j] += pos[j];
  }
  Tensor enc = enc_in;
  for (auto& block : enc_blocks_) enc = block.forward(enc);
  enc = enc_norm_.forward(enc);

  // decoder over the full sequence, mask tokens at dropped positions
  Tensor dec_tokens = dec_embed_.forward(enc);  // [nv x dd]
  order_.resize(total);
  if (dec_order) {
    if (dec_order->size() != total) throw DataError("decoder order size mismatch");
    order_ = *dec_order;
  } else {
    for (std::size_t i = 0; i < total; ++i) order_[i] = i;
  }

  std::unordered_map<std::size_t, std::size_t> vis_index;
  vis_index.reserve(nv);
  for (std::size_t i = 0; i < nv; ++i) vis_index.emplace(visible_[i], i);

  Tensor seq({total, dd});
  for (std::size_t i = 0; i < total; ++i) {
    const std::size_t p = order_[i];
    double* row = seq.data() + i * dd;
    const auto it = vis_index.find(p);
    if (it != vis_index.end()) {
      const double* src = dec_tokens.data() + it->second * dd;
      for (std::size_t j = 0; j < dd; ++j) row[j] = src[j];
    } else {
      for (std::size_t j = 0; j < dd; ++j) row[j] = mask_token_.w[j];
    }
    const double* pos = dec_pos_.data() + p * dd;
    for (std::size_t j = 0; j < dd; ++j) row[j] += pos[j];
  }

  for (auto& block : dec_blocks_) seq = block.forward(seq);
  seq = dec_norm_.forward(seq);
  Tensor y_seq = head_.forward(seq);  // [total x plen]

  Tensor y({total, cfg_.patch_len()});
  for (std::size_t i = 0; i < total; ++i) {
    const double* src = y_seq.data() + i * cfg_.patch_len();
    double* dst = y.data() + order_[i] * cfg_.patch_len();
    for (std::size_t j = 0; j < cfg_.patch_len(); ++j) dst[j] = src[j];
  }
  return unpatchify(y, cfg_.scenes, cfg_.bands, cfg_.height, cfg_.width, cfg_.patch);
}

double ViTModel::loss_and_grad(const MaskedChip& mc, const Tensor& truth,
                               Tensor* rec_out) {
  const Tensor rec = reconstruct(mc);
  const double loss = mse_masked_patches(rec, truth, patch_mask_, cfg_.patch);
  if (rec_out) *rec_out = rec;

  const std::size_t total = cfg_.n_patches();
  const std::size_t plen = cfg_.patch_len();
  const double scale = 2.0 / static_cast<double>(masked_.size() * plen);

  // d(loss)/d(head output), in patch order; visible rows do not contribute
  Tensor diff = rec;
  sub_inplace(diff, truth);
  const Tensor diff_patches = patch_matrix(diff, cfg_.patch);
  Tensor dy({total, plen});
  for (std::size_t n : masked_) {
    const double* src = diff_patches.data() + n * plen;
    double* dst = dy.data() + n * plen;
    for (std::size_t j = 0; j < plen; ++j) dst[j] = scale * src[j];
  }

  // to sequence order
  Tensor dy_seq({total, plen});
  for (std::size_t i = 0; i < total; ++i) {
    const double* src = dy.data() + order_[i] * plen;
    double* dst = dy_seq.data() + i * plen;
    for (std::size_t j = 0; j < plen; ++j) dst[j] = src[j];
  }

  Tensor d = head_.backward(dy_seq);
  d = dec_norm_.backward(d);
  for (auto it = dec_blocks_.rbegin(); it != dec_blocks_.rend(); ++it) {
    d = it->backward(d);
  }

  const std::size_t dd = cfg_.dec_dim;
  std::unordered_map<std::size_t, std::size_t> vis_index;
  vis_index.reserve(visible_.size());
  for (std::size_t i = 0; i < visible_.size(); ++i) vis_index.emplace(visible_[i], i);

  Tensor d_dec_tokens({visible_.size(), dd});
  for (std::size_t i = 0; i < total; ++i) {
    const std::size_t p = order_[i];
    const double* src = d.data() + i * dd;
    const auto it = vis_index.find(p);
    if (it != vis_index.end()) {
      double* dst = d_dec_tokens.data() + it->second * dd;
      for (std::size_t j = 0; j < dd; ++j) dst[j] = src[j];
    } else {
      for (std::size_t j = 0; j < dd; ++j) mask_token_.g[j] += src[j];
    }
  }

  Tensor de = dec_embed_.backward(d_dec_tokens);
  de = enc_norm_.backward(de);
  for (auto it = enc_blocks_.rbegin(); it != enc_blocks_.rend(); ++it) {
    de = it->backward(de);
  }
  patch_embed_.backward(de);  // input gradient discarded
  return loss;
}

nn::ParamRefs ViTModel::params() {
  nn::ParamRefs p = patch_embed_.params();
  for (auto& blk : enc_blocks_) nn::append(p, blk.params());
  nn::append(p, enc_norm_.params());
  nn::append(p, dec_embed_.params());
  p.push_back(&mask_token_);
  for (auto& blk : dec_blocks_) nn::append(p, blk.params());
  nn::append(p, dec_norm_.params());
  nn::append(p, head_.params());
  return p;
}

void save_checkpoint(const ViTModel& model, const std::filesystem::path& path,
                     std::uint32_t epoch, double val_mae) {
  ViTModel& m = const_cast<ViTModel&>(model);
  const ViTConfig& c = m.config();
  ckpt::Checkpoint ck;
  ck.magic = "VITC";
  ck.config = {
      {"patch", static_cast<double>(c.patch)},
      {"embed_dim", static_cast<double>(c.embed_dim)},
      {"enc_depth", static_cast<double>(c.enc_depth)},
      {"enc_heads", static_cast<double>(c.enc_heads)},
      {"dec_dim", static_cast<double>(c.dec_dim)},
      {"dec_depth", static_cast<double>(c.dec_depth)},
      {"dec_heads", static_cast<double>(c.dec_heads)},
      {"mlp_ratio", static_cast<double>(c.mlp_ratio)},
      {"scenes", static_cast<double>(c.scenes)},
      {"bands", static_cast<double>(c.bands)},
      {"height", static_cast<double>(c.height)},
      {"width", static_cast<double>(c.width)},
  };
  for (nn::Param* p : m.params()) ck.arrays.emplace_back(p->name, p->w);
  ck.epoch = epoch;
  ck.val_mae = val_mae;
  ckpt::write_checkpoint(ck, path);
}

ViTModel load_checkpoint(const std::filesystem::path& path) {
  const ckpt::Checkpoint ck = ckpt::read_checkpoint(path, "VITC");
  ViTConfig c;
  c.patch = static_cast<std::size_t>(ck.config_value("patch"));
  c.embed_dim = static_cast<std::size_t>(ck.config_value("embed_dim"));
  c.enc_depth = static_cast<std::size_t>(ck.config_value("enc_depth"));
  c.enc_heads = static_cast<std::size_t>(ck.config_value("enc_heads"));
  c.dec_dim = static_cast<std::size_t>(ck.config_value("dec_dim"));
  c.dec_depth = static_cast<std::size_t>(ck.config_value("dec_depth"));
  c.dec_heads = static_cast<std::size_t>(ck.config_value("dec_heads"));
  c.mlp_ratio = static_cast<std::size_t>(ck.config_value("mlp_ratio"));
  c.scenes = static_cast<std::size_t>(ck.config_value("scenes"));
  c.bands = static_cast<std::size_t>(ck.config_value("bands"));
  c.height = static_cast<std::size_t>(ck.config_value("height"));
  c.width = static_cast<std::size_t>(ck.config_value("width"));
  ViTModel model(c, 0);
  for (nn::Param* p : model.params()) {
    const Tensor& arr = ck.array(p->name);
    if (arr.shape() != p->w.shape()) {
      throw DataError("checkpoint array '" + p->name + "' has wrong shape");
    }
    p->w = arr;
  }
  return model;
}

}  // namespace cloudfill::vit
