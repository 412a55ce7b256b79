#include "creco/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace creco::kernels {
namespace {

constexpr KernelSet kScalar{scalar::ucb_fill, scalar::dot, scalar::lerp,
                            scalar::scale, "scalar"};

#ifdef CRECO_HAVE_AVX2_BUILD
constexpr KernelSet kAvx2{avx2::ucb_fill, avx2::dot, avx2::lerp, avx2::scale,
                          "avx2"};

bool cpu_has_avx2() { return __builtin_cpu_supports("avx2"); }
#endif

const KernelSet* find(const char* name) {
  if (std::strcmp(name, "scalar") == 0) return &kScalar;
#ifdef CRECO_HAVE_AVX2_BUILD
  if (std::strcmp(name, "avx2") == 0 && cpu_has_avx2()) return &kAvx2;
#endif
  return nullptr;
}

const KernelSet* resolve_default() {
  if (const char* forced = std::getenv("CREATOR_ECON_SIMD")) {
    if (const KernelSet* set = find(forced)) return set;
  }
#ifdef CRECO_HAVE_AVX2_BUILD
  if (cpu_has_avx2()) return &kAvx2;
#endif
  return &kScalar;
}

std::atomic<const KernelSet*> g_active{nullptr};

}  // namespace

const KernelSet& active() {
  const KernelSet* set = g_active.load(std::memory_order_acquire);
  if (set == nullptr) {
    set = resolve_default();
    g_active.store(set, std::memory_order_release);
  }
  return *set;
}

bool select(const char* name) {
  const KernelSet* set = find(name);
  if (set == nullptr) return false;
  g_active.store(set, std::memory_order_release);
  return true;
}

}  // namespace creco::kernels
