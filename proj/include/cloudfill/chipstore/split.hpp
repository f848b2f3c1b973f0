#pragma once

#include <cstdint>
#include <vector>

#include "cloudfill/chipstore/chip.hpp"

namespace cloudfill::chipstore {

// Deterministic disjoint split. train_ids keeps the shuffled order so that
// nested training subsets can be taken as prefixes. The validation mask
// pool is coverage-balanced into 10 deciles (val_mask_count must divide by
// 10); training masks are the remainder.
DatasetSplit split_dataset(const std::vector<Chip>& chips,
                           const std::vector<CloudMask>& masks,
                           double train_fraction, std::size_t val_mask_count,
                           std::uint64_t seed);

}  // namespace cloudfill::chipstore
