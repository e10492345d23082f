#include <atomic>
#include <cstdlib>
#include <string_view>

#include "d2d/errors.hpp"
#include "d2d/kernels.hpp"

namespace d2d::kernels {

#ifndef D2D_HAVE_AVX2
const KernelTable* avx2_table() noexcept { return nullptr; }
#endif

bool cpu_supports(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(D2D_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
      __builtin_cpu_init();
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

namespace {

const KernelTable* initial_table() noexcept {
  if (const char* env = std::getenv("D2D_SIMD")) {
    if (std::string_view(env) == "scalar") return &scalar_table();
  }
  if (cpu_supports(Isa::avx2) && avx2_table()) return avx2_table();
  return &scalar_table();
}

std::atomic<const KernelTable*>& current() noexcept {
  static std::atomic<const KernelTable*> table{initial_table()};
  return table;
}

}  // namespace

const KernelTable& active() noexcept { return *current().load(std::memory_order_relaxed); }

void select(Isa isa) {
  if (isa == Isa::scalar) {
    current().store(&scalar_table());
    return;
  }
  if (!cpu_supports(isa) || !avx2_table()) {
    throw CapabilityError("AVX2 kernels are not available on this CPU/build");
  }
  current().store(avx2_table());
}

}  // namespace d2d::kernels
