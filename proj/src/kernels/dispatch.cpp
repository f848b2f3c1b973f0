#include "cloudfill/kernels/kernels.hpp"

#include <cstdlib>

#include "cloudfill/core/errors.hpp"
#include "cloudfill/kernels/avx2.hpp"
#include "cloudfill/kernels/scalar.hpp"

namespace cloudfill::kern {

namespace {

const Backend* pick(const std::string& name) {
  if (name == "scalar") return &scalar::backend();
#if defined(__x86_64__) || defined(_M_X64)
  if (name == "avx2") {
    if (!avx2::supported()) {
      throw ConfigError("kernel backend 'avx2' not supported on this CPU");
    }
    return &avx2::backend();
  }
#else
  if (name == "avx2") {
    throw ConfigError("kernel backend 'avx2' not available in this build");
  }
#endif
  if (name == "auto") {
#if defined(__x86_64__) || defined(_M_X64)
    if (avx2::supported()) return &avx2::backend();
#endif
    return &scalar::backend();
  }
  throw ConfigError("unknown kernel backend '" + name + "'");
}

const Backend* initial() {
  const char* env = std::getenv("CLOUDFILL_KERNEL_BACKEND");
  return pick(env ? env : "auto");
}

const Backend*& current() {
  static const Backend* b = initial();
  return b;
}

}  // namespace

const Backend& active() { return *current(); }

void force(const std::string& name) { current() = pick(name); }

std::vector<std::string> available() {
  std::vector<std::string> v{"scalar"};
#if defined(__x86_64__) || defined(_M_X64)
  if (avx2::supported()) v.push_back("avx2");
#endif
  return v;
}

}  // namespace cloudfill::kern
