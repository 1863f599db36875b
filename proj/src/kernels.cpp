#include "segtopic/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <stdexcept>

namespace segtopic::kern {
namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* pick_default() {
  if (const char* env = std::getenv("SEGTOPIC_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return &scalar_table();
    if (std::strcmp(env, "avx2") == 0 && avx2_available()) return avx2_table();
  }
  if (avx2_available()) return avx2_table();
  return &scalar_table();
}

const KernelTable*& active_slot() {
  static const KernelTable* slot = pick_default();
  return slot;
}

}  // namespace

bool avx2_available() {
  static const bool ok = avx2_table() != nullptr && cpu_has_avx2();
  return ok;
}

const KernelTable& active() { return *active_slot(); }

void select(Backend b) {
  switch (b) {
    case Backend::kScalar:
      active_slot() = &scalar_table();
      return;
    case Backend::kAvx2:
      if (!avx2_available()) throw std::runtime_error("avx2 kernels unavailable on this CPU");
      active_slot() = avx2_table();
      return;
  }
  throw std::runtime_error("unknown kernel backend");
}

}  // namespace segtopic::kern
