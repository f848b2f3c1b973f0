#include "cloudfill/chipstore/format.hpp"

#include <fstream>

#include "cloudfill/core/binio.hpp"
#include "cloudfill/core/errors.hpp"

namespace cloudfill::chipstore {

namespace fs = std::filesystem;

void write_chip(const Chip& chip, const fs::path& path) {
  chip.validate();
  ByteWriter w;
  w.magic("CHP1");
  w.u32(static_cast<std::uint32_t>(chip.scenes));
  w.u32(static_cast<std::uint32_t>(chip.bands));
  w.u32(static_cast<std::uint32_t>(chip.height));
  w.u32(static_cast<std::uint32_t>(chip.width));
  for (std::uint32_t d : chip.dates) w.u32(d);
  for (std::size_t i = 0; i < chip.data.numel(); ++i) {
    w.f32(static_cast<float>(chip.data[i]));
  }
  w.to_file(path);
}

Chip read_chip(const fs::path& path) {
  ByteReader r = ByteReader::from_file(path);
  r.expect_magic("CHP1");
  Chip chip;
  chip.id = path.stem().string();
  chip.scenes = r.u32();
  chip.bands = r.u32();
  chip.height = r.u32();
  chip.width = r.u32();
  if (chip.scenes == 0 || chip.bands == 0 || chip.height == 0 || chip.width == 0) {
    throw FormatError(path.string(), 4, "zero dimension in header");
  }
  chip.dates.resize(chip.scenes);
  const std::size_t dates_at = r.pos();
  for (std::size_t t = 0; t < chip.scenes; ++t) chip.dates[t] = r.u32();
  for (std::size_t t = 1; t < chip.scenes; ++t) {
    if (chip.dates[t] <= chip.dates[t - 1]) {
      throw FormatError(path.string(), dates_at + 4 * t, "dates not strictly increasing");
    }
    if (chip.dates[t] - chip.dates[t - 1] > 200) {
      throw FormatError(path.string(), dates_at + 4 * t, "scene gap above 200 days");
    }
  }
  chip.data = Tensor({chip.scenes, chip.bands, chip.height, chip.width});
  for (std::size_t i = 0; i < chip.data.numel(); ++i) {
    const std::size_t at = r.pos();
    const double v = static_cast<double>(r.f32());
    if (!(v >= 0.0 && v <= 1.0)) {
      throw FormatError(path.string(), at, "reflectance outside [0,1]");
    }
    chip.data[i] = v;
  }
  r.expect_end();
  return chip;
}

void write_mask(const CloudMask& mask, const fs::path& path) {
  mask.validate();
  ByteWriter w;
  w.magic("MSK1");
  w.u32(static_cast<std::uint32_t>(mask.height));
  w.u32(static_cast<std::uint32_t>(mask.width));
  for (std::uint8_t v : mask.mask) w.u8(v);
  w.to_file(path);
}

CloudMask read_mask(const fs::path& path) {
  ByteReader r = ByteReader::from_file(path);
  r.expect_magic("MSK1");
  const std::size_t h = r.u32();
  const std::size_t w = r.u32();
  if (h == 0 || w == 0) throw FormatError(path.string(), 4, "zero dimension in header");
  std::vector<std::uint8_t> px(h * w);
  std::size_t ones = 0;
  for (std::size_t i = 0; i < px.size(); ++i) {
    const std::size_t at = r.pos();
    px[i] = r.u8();
    if (px[i] > 1) throw FormatError(path.string(), at, "mask value outside {0,1}");
    ones += px[i];
  }
  r.expect_end();
  if (ones == 0) {
    throw FormatError(path.string(), 12, "all-zero mask rejected at ingest");
  }
  CloudMask m;
  m.id = path.stem().string();
  m.height = h;
  m.width = w;
  m.mask = std::move(px);
  m.coverage = static_cast<double>(ones) / static_cast<double>(h * w);
  return m;
}

fs::path chip_path(const fs::path& root, const std::string& id) {
  return root / "chips" / (id + ".chp");
}

fs::path mask_path(const fs::path& root, const std::string& id) {
  return root / "masks" / (id + ".msk");
}

void save_dataset(const fs::path& root, const std::vector<Chip>& chips,
                  const std::vector<CloudMask>& masks) {
  fs::create_directories(root / "chips");
  fs::create_directories(root / "masks");
  for (const Chip& c : chips) write_chip(c, chip_path(root, c.id));
  for (const CloudMask& m : masks) write_mask(m, mask_path(root, m.id));
}

std::vector<Chip> load_chips(const fs::path& root, const std::vector<std::string>& ids) {
  std::vector<Chip> out;
  out.reserve(ids.size());
  for (const std::string& id : ids) out.push_back(read_chip(chip_path(root, id)));
  return out;
}

std::vector<CloudMask> load_masks(const fs::path& root,
                                  const std::vector<std::string>& ids) {
  std::vector<CloudMask> out;
  out.reserve(ids.size());
  for (const std::string& id : ids) out.push_back(read_mask(mask_path(root, id)));
  return out;
}

namespace {

void write_id_list(const fs::path& path, const std::vector<std::string>& ids) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open for write: " + path.string());
  for (const std::string& id : ids) out << id << '\n';
}

std::vector<std::string> read_id_list(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open: " + path.string());
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) ids.push_back(line);
  }
  return ids;
}

}  // namespace

void write_split(const fs::path& root, const DatasetSplit& split) {
  fs::create_directories(root / "splits");
  write_id_list(root / "splits" / "train_chips.txt", split.train_ids);
  write_id_list(root / "splits" / "val_chips.txt", split.val_ids);
  write_id_list(root / "splits" / "train_masks.txt", split.train_mask_ids);
  write_id_list(root / "splits" / "val_masks.txt", split.val_mask_ids);
}

DatasetSplit read_split(const fs::path& root) {
  DatasetSplit s;
  s.train_ids = read_id_list(root / "splits" / "train_chips.txt");
  s.val_ids = read_id_list(root / "splits" / "val_chips.txt");
  s.train_mask_ids = read_id_list(root / "splits" / "train_masks.txt");
  s.val_mask_ids = read_id_list(root / "splits" / "val_masks.txt");
  return s;
}

}  // namespace cloudfill::chipstore
