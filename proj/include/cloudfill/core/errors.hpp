#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cloudfill {

// Error taxonomy mirrored by the CLI exit codes:
//   ConfigError -> 2, DataError/FormatError -> 3, DivergenceError -> 4.

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File-level problem: bad magic, truncated payload, illegal value.
// Carries the byte offset at which decoding failed.
class FormatError : public DataError {
 public:
  FormatError(const std::string& path, std::size_t offset, const std::string& what)
      : DataError(path + " @ byte " + std::to_string(offset) + ": " + what),
        offset_(offset) {}

  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_ = 0;
};

// Non-finite loss during training.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::size_t epoch)
      : std::runtime_error(what + " (epoch " + std::to_string(epoch) + ")"),
        epoch_(epoch) {}

  std::size_t epoch() const { return epoch_; }

 private:
  std::size_t epoch_ = 0;
};

}  // namespace cloudfill
