#include "cloudfill/io/checkpoint.hpp"

#include <cmath>

#include "cloudfill/core/binio.hpp"
#include "cloudfill/core/errors.hpp"

namespace cloudfill::ckpt {

namespace {
constexpr std::uint32_t kVersion = 1;
}

double Checkpoint::config_value(const std::string& key) const {
  for (const auto& [k, v] : config) {
    if (k == key) return v;
  }
  throw DataError("checkpoint config missing key '" + key + "'");
}

const Tensor& Checkpoint::array(const std::string& name) const {
  for (const auto& [k, v] : arrays) {
    if (k == name) return v;
  }
  throw DataError("checkpoint missing array '" + name + "'");
}

void write_checkpoint(const Checkpoint& ck, const std::filesystem::path& path) {
  if (ck.magic.size() != 4) throw DataError("checkpoint magic must be 4 bytes");
  ByteWriter w;
  char m[5] = {ck.magic[0], ck.magic[1], ck.magic[2], ck.magic[3], 0};
  w.magic(m);
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(ck.config.size()));
  for (const auto& [k, v] : ck.config) {
    w.str(k);
    w.f64(v);
  }
  w.u32(static_cast<std::uint32_t>(ck.arrays.size()));
  for (const auto& [name, t] : ck.arrays) {
    w.str(name);
    w.u32(static_cast<std::uint32_t>(t.ndim()));
    for (std::size_t i = 0; i < t.ndim(); ++i) {
      w.u32(static_cast<std::uint32_t>(t.dim(i)));
    }
    for (std::size_t i = 0; i < t.numel(); ++i) {
      w.f32(static_cast<float>(t[i]));
    }
  }
  w.u32(ck.epoch);
  w.f64(ck.val_mae);
  w.to_file(path);
}

namespace {

Checkpoint read_body(ByteReader& r, const std::string& magic) {
  Checkpoint ck;
  ck.magic = magic;
  const std::uint32_t version = r.u32();
  if (version != kVersion) r.fail("unsupported checkpoint version");
  const std::uint32_t n_config = r.u32();
  ck.config.reserve(n_config);
  for (std::uint32_t i = 0; i < n_config; ++i) {
    std::string key = r.str();
    const double value = r.f64();
    ck.config.emplace_back(std::move(key), value);
  }
  const std::uint32_t n_arrays = r.u32();
  ck.arrays.reserve(n_arrays);
  for (std::uint32_t i = 0; i < n_arrays; ++i) {
    std::string name = r.str();
    const std::uint32_t ndim = r.u32();
    if (ndim == 0 || ndim > 8) r.fail("array rank out of range");
    std::vector<std::size_t> shape(ndim);
    for (std::uint32_t d = 0; d < ndim; ++d) {
      shape[d] = r.u32();
      if (shape[d] == 0) r.fail("zero array dimension");
    }
    Tensor t(shape);
    for (std::size_t j = 0; j < t.numel(); ++j) {
      const std::size_t at = r.pos();
      const double v = static_cast<double>(r.f32());
      if (!std::isfinite(v)) {
        r.fail("non-finite parameter at byte " + std::to_string(at));
      }
      t[j] = v;
    }
    ck.arrays.emplace_back(std::move(name), std::move(t));
  }
  ck.epoch = r.u32();
  ck.val_mae = r.f64();
  r.expect_end();
  return ck;
}

}  // namespace

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  ByteReader r = ByteReader::from_file(path);
  const std::string magic = r.peek_magic();
  if (magic == "VITC") {
    r.expect_magic("VITC");
  } else if (magic == "CGNC") {
    r.expect_magic("CGNC");
  } else {
    r.fail("bad magic, expected \"VITC\" or \"CGNC\"");
  }
  return read_body(r, magic);
}

Checkpoint read_checkpoint(const std::filesystem::path& path, const std::string& magic) {
  Checkpoint ck = read_checkpoint(path);
  if (ck.magic != magic) {
    throw FormatError(path.string(), 0,
                      "bad magic, expected \"" + magic + "\", found \"" + ck.magic + "\"");
  }
  return ck;
}

std::string peek_magic(const std::filesystem::path& path) {
  ByteReader r = ByteReader::from_file(path);
  return r.peek_magic();
}

}  // namespace cloudfill::ckpt
