#pragma once

#include <filesystem>
#include <vector>

#include "cloudfill/chipstore/chip.hpp"

namespace cloudfill::chipstore {

// CHP1 (little-endian): "CHP1" | u32 T,B,H,W | T x u32 dates |
//   T*B*H*W float32 values in (t, b, row, col) order.
// MSK1: "MSK1" | u32 H,W | H*W u8 values in {0,1}.
// Chip/mask ids are the file stems.

void write_chip(const Chip& chip, const std::filesystem::path& path);
Chip read_chip(const std::filesystem::path& path);

void write_mask(const CloudMask& mask, const std::filesystem::path& path);
CloudMask read_mask(const std::filesystem::path& path);

// dataset directory layout: <root>/chips/*.chp, <root>/masks/*.msk,
// <root>/splits/{train_chips,val_chips,train_masks,val_masks}.txt
std::filesystem::path chip_path(const std::filesystem::path& root, const std::string& id);
std::filesystem::path mask_path(const std::filesystem::path& root, const std::string& id);

void save_dataset(const std::filesystem::path& root, const std::vector<Chip>& chips,
                  const std::vector<CloudMask>& masks);

std::vector<Chip> load_chips(const std::filesystem::path& root,
                             const std::vector<std::string>& ids);
std::vector<CloudMask> load_masks(const std::filesystem::path& root,
                                  const std::vector<std::string>& ids);

void write_split(const std::filesystem::path& root, const DatasetSplit& split);
DatasetSplit read_split(const std::filesystem::path& root);

}  // namespace cloudfill::chipstore
