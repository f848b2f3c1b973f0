#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "cloudfill/core/errors.hpp"

namespace cloudfill {

// Little-endian byte buffer codecs for the CHP1/MSK1/VITC/CGNC formats.

class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }

  void u16(std::uint16_t v) {
    u8(static_cast<std::uint8_t>(v));
    u8(static_cast<std::uint8_t>(v >> 8));
  }

  void u32(std::uint32_t v) {
    u16(static_cast<std::uint16_t>(v));
    u16(static_cast<std::uint16_t>(v >> 16));
  }

  void u64(std::uint64_t v) {
    u32(static_cast<std::uint32_t>(v));
    u32(static_cast<std::uint32_t>(v >> 32));
  }

  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

  void magic(const char (&m)[5]) { buf_.append(m, 4); }

  void str(const std::string& s) {
    u16(static_cast<std::uint16_t>(s.size()));
    buf_.append(s);
  }

  const std::string& bytes() const { return buf_; }

  void to_file(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open for write: " + path.string());
    out.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
    if (!out) throw DataError("short write: " + path.string());
  }

 private:
  std::string buf_;
};

class ByteReader {
 public:
  ByteReader(std::string bytes, std::string origin)
      : buf_(std::move(bytes)), origin_(std::move(origin)) {}

  static ByteReader from_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open: " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
    return ByteReader(std::move(bytes), path.string());
  }

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return buf_.size() - pos_; }

  std::uint8_t u8() {
    need(1, "u8");
    return static_cast<std::uint8_t>(buf_[pos_++]);
  }

  std::uint16_t u16() {
    need(2, "u16");
    std::uint16_t v = static_cast<std::uint8_t>(buf_[pos_]) |
                      (static_cast<std::uint16_t>(static_cast<std::uint8_t>(buf_[pos_ + 1])) << 8);
    pos_ += 2;
    return v;
  }

  std::uint32_t u32() {
    need(4, "u32");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(buf_[pos_ + i])) << (8 * i);
    }
    pos_ += 4;
    return v;
  }

  std::uint64_t u64() {
    const std::uint64_t lo = u32();
    return lo | (static_cast<std::uint64_t>(u32()) << 32);
  }

  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }

  void expect_magic(const char (&m)[5]) {
    need(4, "magic");
    if (std::memcmp(buf_.data() + pos_, m, 4) != 0) {
      throw FormatError(origin_, pos_, std::string("bad magic, expected \"") + m + "\"");
    }
    pos_ += 4;
  }

  std::string peek_magic() {
    need(4, "magic");
    return buf_.substr(pos_, 4);
  }

  std::string str() {
    const std::size_t n = u16();
    need(n, "string payload");
    std::string s = buf_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  void expect_end() const {
    if (pos_ != buf_.size()) {
      throw FormatError(origin_, pos_, "trailing bytes after payload");
    }
  }

  void fail(const std::string& what) const { throw FormatError(origin_, pos_, what); }

 private:
  void need(std::size_t n, const char* what) {
    if (buf_.size() - pos_ < n) {
      throw FormatError(origin_, pos_, std::string("truncated payload reading ") + what);
    }
  }

  std::string buf_;
  std::string origin_;
  std::size_t pos_ = 0;
};

}  // namespace cloudfill
