#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "cloudfill/core/tensor.hpp"

namespace cloudfill::ckpt {

// Shared container behind the "VITC" and "CGNC" checkpoint files:
//   magic | u32 version | u32 n_config | (str key, f64 value)* |
//   u32 n_arrays | (str name, u32 ndim, u32 dims[], float32 values[])* |
//   u32 epoch | f64 val_mae
// Strings are u16-length-prefixed; arrays carry float32 LE payloads.
struct Checkpoint {
  std::string magic;  // "VITC" or "CGNC"
  std::vector<std::pair<std::string, double>> config;
  std::vector<std::pair<std::string, Tensor>> arrays;
  std::uint32_t epoch = 0;
  double val_mae = 0.0;

  double config_value(const std::string& key) const;  // throws DataError if absent
  const Tensor& array(const std::string& name) const;
};

void write_checkpoint(const Checkpoint& ck, const std::filesystem::path& path);
Checkpoint read_checkpoint(const std::filesystem::path& path);
Checkpoint read_checkpoint(const std::filesystem::path& path, const std::string& magic);

std::string peek_magic(const std::filesystem::path& path);

}  // namespace cloudfill::ckpt
