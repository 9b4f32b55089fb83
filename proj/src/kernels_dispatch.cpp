#include <cstdlib>
#include <cstring>

#include "sapsk/kernels.hpp"

namespace sapsk::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64) || defined(__i386__)
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

const KernelSet& select() {
  const KernelSet* avx2 = avx2_or_null();
  const bool usable = avx2 != nullptr && cpu_has_avx2();
  if (const char* env = std::getenv("SAPSK_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return scalar();
    if (std::strcmp(env, "avx2") == 0 && usable) return *avx2;
    // Unknown value or unsatisfiable request: fall through to auto.
  }
  return usable ? *avx2 : scalar();
}

}  // namespace

bool avx2_supported() { return avx2_or_null() != nullptr && cpu_has_avx2(); }

const KernelSet& active() {
  static const KernelSet& chosen = select();
  return chosen;
}

}  // namespace sapsk::kernels
