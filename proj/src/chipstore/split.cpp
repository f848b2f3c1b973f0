#include "cloudfill/chipstore/split.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "cloudfill/core/errors.hpp"
#include "cloudfill/core/rng.hpp"
#include "cloudfill/masking/masking.hpp"

namespace cloudfill::chipstore {

DatasetSplit split_dataset(const std::vector<Chip>& chips,
                           const std::vector<CloudMask>& masks,
                           double train_fraction, std::size_t val_mask_count,
                           std::uint64_t seed) {
  if (chips.empty()) throw DataError("no chips to split");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train_fraction must be in (0,1)");
  }
  if (val_mask_count == 0 || val_mask_count % 10 != 0) {
    throw ConfigError("val_mask_count must be a positive multiple of 10");
  }

  DatasetSplit split;
  split.train_ids.reserve(chips.size());
  for (const Chip& c : chips) split.train_ids.push_back(c.id);
  Rng chip_rng = Rng(seed).derive("split/chips");
  chip_rng.shuffle(split.train_ids);

  const std::size_t n_train = std::min<std::size_t>(
      chips.size(),
      static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(chips.size()))));
  split.val_ids.assign(split.train_ids.begin() + static_cast<std::ptrdiff_t>(n_train),
                       split.train_ids.end());
  split.train_ids.resize(n_train);

  const int per_bin = static_cast<int>(val_mask_count / 10);
  const std::vector<CloudMask> val_pool = masking::balance_mask_pool(
      masks, 10, per_bin, Rng(seed).derive("split/valmasks").seed());

  std::set<std::string> val_mask_set;
  for (const CloudMask& m : val_pool) {
    split.val_mask_ids.push_back(m.id);
    val_mask_set.insert(m.id);
  }
  for (const CloudMask& m : masks) {
    if (!val_mask_set.count(m.id)) split.train_mask_ids.push_back(m.id);
  }
  return split;
}

}  // namespace cloudfill::chipstore
