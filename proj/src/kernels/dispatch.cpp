#include <atomic>
#include <cstdlib>
#include <string>

#include "automap/kernels/kernels.hpp"

namespace automap::kernels {

namespace {

constexpr KernelTable kScalar{Isa::Scalar, detail::sad_u8_scalar, detail::rgb_to_luma8_scalar};
#if defined(AUTOMAP_HAVE_AVX2)
constexpr KernelTable kAvx2{Isa::Avx2, detail::sad_u8_avx2, detail::rgb_to_luma8_avx2};
#endif
#if defined(AUTOMAP_HAVE_NEON)
constexpr KernelTable kNeon{Isa::Neon, detail::sad_u8_neon, detail::rgb_to_luma8_neon};
#endif

const KernelTable* detect() {
  if (const char* env = std::getenv("AUTOMAP_SIMD")) {
    const std::string want = env;
    if (want == "scalar") return &kScalar;
    if (want == "avx2" && available(Isa::Avx2)) return &table(Isa::Avx2);
    if (want == "neon" && available(Isa::Neon)) return &table(Isa::Neon);
  }
  if (available(Isa::Avx2)) return &table(Isa::Avx2);
  if (available(Isa::Neon)) return &table(Isa::Neon);
  return &kScalar;
}

std::atomic<const KernelTable*>& selected() {
  static std::atomic<const KernelTable*> table{detect()};
  return table;
}

}  // namespace

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "scalar";
}

bool available(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if defined(AUTOMAP_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(AUTOMAP_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table(Isa isa) {
  if (!available(isa)) throw Error("kernel ISA '" + std::string(to_string(isa)) + "' is not available");
  switch (isa) {
#if defined(AUTOMAP_HAVE_AVX2)
    case Isa::Avx2: return kAvx2;
#endif
#if defined(AUTOMAP_HAVE_NEON)
    case Isa::Neon: return kNeon;
#endif
    default: return kScalar;
  }
}

const KernelTable& active() { return *selected().load(std::memory_order_relaxed); }

void select(Isa isa) { selected().store(&table(isa), std::memory_order_relaxed); }

}  // namespace automap::kernels
