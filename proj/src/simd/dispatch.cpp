#include <atomic>
#include <cstdlib>
#include <string_view>
#include <vector>

#include "hrmt/simd/kernels.hpp"

namespace hrmt::simd {
namespace {

bool cpu_has_avx2() {
#if defined(HRMT_BUILD_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* find(std::string_view name) {
  if (name == "scalar") return &kScalarKernels;
#ifdef HRMT_BUILD_AVX2
  if (name == "avx2" && cpu_has_avx2()) return &kAvx2Kernels;
#endif
#ifdef HRMT_BUILD_NEON
  if (name == "neon") return &kNeonKernels;
#endif
  return nullptr;
}

const KernelTable* pick_default() {
  if (const char* env = std::getenv("HRMT_SIMD")) {
    if (const KernelTable* t = find(env)) return t;
  }
#ifdef HRMT_BUILD_AVX2
  if (cpu_has_avx2()) return &kAvx2Kernels;
#endif
#ifdef HRMT_BUILD_NEON
  return &kNeonKernels;
#endif
  return &kScalarKernels;
}

std::atomic<const KernelTable*> g_active{nullptr};

}  // namespace

const KernelTable& active() {
  const KernelTable* t = g_active.load(std::memory_order_acquire);
  if (!t) {
    t = pick_default();
    g_active.store(t, std::memory_order_release);
  }
  return *t;
}

bool select(std::string_view name) {
  const KernelTable* t = find(name);
  if (!t) return false;
  g_active.store(t, std::memory_order_release);
  return true;
}

std::vector<const KernelTable*> available() {
  std::vector<const KernelTable*> out{&kScalarKernels};
#ifdef HRMT_BUILD_AVX2
  if (cpu_has_avx2()) out.push_back(&kAvx2Kernels);
#endif
#ifdef HRMT_BUILD_NEON
  out.push_back(&kNeonKernels);
#endif
  return out;
}

}  // namespace hrmt::simd
