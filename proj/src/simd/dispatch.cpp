#include <atomic>
#include <cstdlib>
#include <cstring>

#include "crossplit/simd/kernels.hpp"

namespace crossplit::simd {
namespace {

Isa initial_isa() noexcept {
  const Isa best = detected_isa();
  if (const char* env = std::getenv("CROSSPLIT_SIMD")) {
    if (std::strcmp(env, "scalar") == 0) return Isa::kScalar;
  }
  return best;
}

std::atomic<Isa>& active_slot() noexcept {
  static std::atomic<Isa> slot{initial_isa()};
  return slot;
}

}  // namespace

const char* to_string(Isa isa) noexcept {
  switch (isa) {
    case Isa::kScalar: return "scalar";
    case Isa::kAvx2: return "avx2";
  }
  return "unknown";
}

Isa detected_isa() noexcept {
#if CROSSPLIT_HAVE_AVX2
  if (__builtin_cpu_supports("avx2")) return Isa::kAvx2;
#endif
  return Isa::kScalar;
}

Isa active_isa() noexcept { return active_slot().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) noexcept {
  if (isa == Isa::kAvx2 && detected_isa() != Isa::kAvx2) isa = Isa::kScalar;
  active_slot().store(isa, std::memory_order_relaxed);
}

const KernelTable& kernels(Isa isa) noexcept {
#if CROSSPLIT_HAVE_AVX2
  if (isa == Isa::kAvx2 && detected_isa() == Isa::kAvx2) return detail::kAvx2Table;
#endif
  (void)isa;
  return detail::kScalarTable;
}

}  // namespace crossplit::simd
