#pragma once

// Data-parallel inner loops used by registration and rendering.
//
// Every kernel has a portable scalar reference in kernels_scalar.cpp and
// optional ISA variants (AVX2 on x86-64, NEON on AArch64). The variant is
// chosen once at startup from CPU feature detection; `AUTOMAP_SIMD=scalar`
// (or `avx2`, `neon`) forces a specific table. All variants must produce
// bit-identical results; tests/unit/kernels_test.cpp checks that.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

#include "automap/core/types.hpp"

namespace automap::kernels {

enum class Isa { Scalar, Avx2, Neon };

std::string_view to_string(Isa isa);

struct KernelTable {
  Isa isa;
  /// Sum of |a[i] - b[i]| over n bytes.
  std::uint64_t (*sad_u8)(const std::uint8_t* a, const std::uint8_t* b, std::size_t n);
  /// Converts n RGB pixels to `luma8`.
  void (*rgb_to_luma8)(const Rgb* src, std::uint8_t* dst, std::size_t n);
};

/// Whether this build and this CPU can run `isa`.
bool available(Isa isa);

/// Table for a specific ISA. Throws `Error` when unavailable.
const KernelTable& table(Isa isa);

/// Table selected for this process.
const KernelTable& active();

/// Replaces the process-wide selection (tests and benchmarks).
void select(Isa isa);

inline std::uint64_t sad_u8(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  return active().sad_u8(a.data(), b.data(), a.size() < b.size() ? a.size() : b.size());
}

inline void rgb_to_luma8(std::span<const Rgb> src, std::span<std::uint8_t> dst) {
  active().rgb_to_luma8(src.data(), dst.data(), src.size() < dst.size() ? src.size() : dst.size());
}

namespace detail {
std::uint64_t sad_u8_scalar(const std::uint8_t* a, const std::uint8_t* b, std::size_t n);
void rgb_to_luma8_scalar(const Rgb* src, std::uint8_t* dst, std::size_t n);
#if defined(AUTOMAP_HAVE_AVX2)
std::uint64_t sad_u8_avx2(const std::uint8_t* a, const std::uint8_t* b, std::size_t n);
void rgb_to_luma8_avx2(const Rgb* src, std::uint8_t* dst, std::size_t n);
#endif
#if defined(AUTOMAP_HAVE_NEON)
std::uint64_t sad_u8_neon(const std::uint8_t* a, const std::uint8_t* b, std::size_t n);
void rgb_to_luma8_neon(const Rgb* src, std::uint8_t* dst, std::size_t n);
#endif
}  // namespace detail

}  // namespace automap::kernels
