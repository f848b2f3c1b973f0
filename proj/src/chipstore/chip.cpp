#include "cloudfill/chipstore/chip.hpp"

#include <cmath>

#include "cloudfill/core/errors.hpp"

namespace cloudfill::chipstore {

std::uint32_t Chip::max_gap_days() const {
  std::uint32_t g = 0;
  for (std::size_t i = 1; i < dates.size(); ++i) {
    g = std::max(g, dates[i] - dates[i - 1]);
  }
  return g;
}

void Chip::validate() const {
  if (id.empty()) throw DataError("chip has empty id");
  if (scenes == 0 || bands == 0 || height == 0 || width == 0) {
    throw DataError("chip " + id + ": zero dimension");
  }
  if (dates.size() != scenes) {
    throw DataError("chip " + id + ": dates/scenes mismatch");
  }
  const std::vector<std::size_t> expect{scenes, bands, height, width};
  if (data.shape() != expect) {
    throw DataError("chip " + id + ": data shape does not match dims");
  }
  for (std::size_t i = 0; i < data.numel(); ++i) {
    const double v = data[i];
    if (!(v >= 0.0 && v <= 1.0)) {
      throw DataError("chip " + id + ": value outside [0,1] or non-finite");
    }
  }
  for (std::size_t i = 1; i < dates.size(); ++i) {
    if (dates[i] <= dates[i - 1]) {
      throw DataError("chip " + id + ": dates not strictly increasing");
    }
    const std::uint32_t gap = dates[i] - dates[i - 1];
    if (gap < 1 || gap > 200) {
      throw DataError("chip " + id + ": scene gap " + std::to_string(gap) +
                      " outside [1,200] days");
    }
  }
}

std::size_t CloudMask::cloudy_count() const {
  std::size_t n = 0;
  for (std::uint8_t v : mask) n += v;
  return n;
}

CloudMask CloudMask::from_pixels(std::string id, std::size_t height, std::size_t width,
                                 std::vector<std::uint8_t> pixels) {
  CloudMask m;
  m.id = std::move(id);
  m.height = height;
  m.width = width;
  m.mask = std::move(pixels);
  if (m.mask.size() != height * width) {
    throw DataError("mask " + m.id + ": pixel count does not match dims");
  }
  std::size_t ones = 0;
  for (std::uint8_t v : m.mask) {
    if (v > 1) throw DataError("mask " + m.id + ": value outside {0,1}");
    ones += v;
  }
  if (ones == 0) throw DataError("mask " + m.id + ": no cloudy pixels");
  m.coverage = static_cast<double>(ones) / static_cast<double>(height * width);
  return m;
}

void CloudMask::validate() const {
  if (id.empty()) throw DataError("mask has empty id");
  if (mask.size() != height * width) {
    throw DataError("mask " + id + ": pixel count does not match dims");
  }
  std::size_t ones = 0;
  for (std::uint8_t v : mask) {
    if (v > 1) throw DataError("mask " + id + ": value outside {0,1}");
    ones += v;
  }
  if (ones == 0) throw DataError("mask " + id + ": no cloudy pixels");
  const double expect = static_cast<double>(ones) / static_cast<double>(height * width);
  if (coverage != expect) {
    throw DataError("mask " + id + ": cached coverage does not match pixels");
  }
}

}  // namespace cloudfill::chipstore
