#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

#include "cloudfill/core/hash.hpp"

namespace cloudfill {

// mt19937_64 engine (bit-specified by the standard) with hand-rolled
// distributions, since std:: distributions are not bit-portable across
// standard libraries and every generated artifact here must be
// reproducible from (args, seed) alone.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // [0, 1)
  double uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // unbiased draw from [0, n)
  std::uint64_t uniform_int(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    std::uint64_t v = eng_();
    while (v < threshold) v = eng_();
    return v % n;
  }

  // standard normal, Box-Muller (second value discarded to keep the
  // stream position a pure function of the call count)
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  double normal(double mu, double sigma) { return mu + sigma * normal(); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[uniform_int(i)]);
    }
  }

  // independent child stream, stable in (parent seed, label)
  Rng derive(std::string_view label) const {
    return Rng(mix64(seed_, fnv1a64(label)));
  }

  Rng derive(std::uint64_t salt) const { return Rng(mix64(seed_, salt)); }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 eng_;
};

}  // namespace cloudfill
