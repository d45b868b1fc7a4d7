#include <atomic>
#include <cstdlib>
#include <string_view>

#include "crfmnes/kernels.hpp"

namespace crfmnes::kernels {

#if defined(CRFMNES_HAVE_AVX2)
const KernelTable& avx2_table_impl();
#endif

namespace {

bool cpu_has_avx2() {
#if defined(CRFMNES_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* resolve_default() {
  const KernelTable* simd = avx2_table();
  if (const char* env = std::getenv("CRFMNES_SIMD")) {
    const std::string_view want{env};
    if (want == "scalar") return &scalar_table();
    if (want == "avx2" && simd != nullptr) return simd;
  }
  return simd != nullptr ? simd : &scalar_table();
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{resolve_default()};
  return table;
}

}  // namespace

const KernelTable* avx2_table() {
#if defined(CRFMNES_HAVE_AVX2)
  static const bool supported = cpu_has_avx2();
  return supported ? &avx2_table_impl() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() { return *current().load(std::memory_order_relaxed); }

bool select(Backend backend) {
  const KernelTable* table = backend == Backend::scalar ? &scalar_table() : avx2_table();
  if (table == nullptr) return false;
  current().store(table, std::memory_order_relaxed);
  return true;
}

std::string_view backend_name(Backend backend) {
  switch (backend) {
    case Backend::scalar:
      return "scalar";
    case Backend::avx2:
      return "avx2";
  }
  return "unknown";
}

}  // namespace crfmnes::kernels
