// Compiled with -mavx2; only reached after a runtime CPU check.

#include <immintrin.h>

#include "automap/kernels/kernels.hpp"

static_assert(sizeof(automap::Rgb) == 3, "Rgb must be packed for the vector loads");

namespace automap::kernels::detail {

std::uint64_t sad_u8_avx2(const std::uint8_t* a, const std::uint8_t* b, std::size_t n) {
  __m256i acc = _mm256_setzero_si256();
  std::size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    const __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
    const __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
    acc = _mm256_add_epi64(acc, _mm256_sad_epu8(va, vb));
  }
  if (i + 16 <= n) {
    const __m128i va = _mm_loadu_si128(reinterpret_cast<const __m128i*>(a + i));
    const __m128i vb = _mm_loadu_si128(reinterpret_cast<const __m128i*>(b + i));
    acc = _mm256_add_epi64(acc, _mm256_zextsi128_si256(_mm_sad_epu8(va, vb)));
    i += 16;
  }
  alignas(32) std::uint64_t lanes[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), acc);
  std::uint64_t sum = lanes[0] + lanes[1] + lanes[2] + lanes[3];
  return sum + sad_u8_scalar(a + i, b + i, n - i);
}

namespace {

// Splits 16 packed RGB pixels (48 bytes) into three 16-byte planes.
inline void deinterleave16(const std::uint8_t* p, __m128i& r, __m128i& g, __m128i& b) {
  const __m128i a0 = _mm_loadu_si128(reinterpret_cast<const __m128i*>(p));
  const __m128i a1 = _mm_loadu_si128(reinterpret_cast<const __m128i*>(p + 16));
  const __m128i a2 = _mm_loadu_si128(reinterpret_cast<const __m128i*>(p + 32));

  r = _mm_or_si128(
      _mm_or_si128(_mm_shuffle_epi8(a0, _mm_setr_epi8(0, 3, 6, 9, 12, 15, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1)),
                   _mm_shuffle_epi8(a1, _mm_setr_epi8(-1, -1, -1, -1, -1, -1, 2, 5, 8, 11, 14, -1, -1, -1, -1, -1))),
      _mm_shuffle_epi8(a2, _mm_setr_epi8(-1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, 1, 4, 7, 10, 13)));
  g = _mm_or_si128(
      _mm_or_si128(_mm_shuffle_epi8(a0, _mm_setr_epi8(1, 4, 7, 10, 13, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1)),
                   _mm_shuffle_epi8(a1, _mm_setr_epi8(-1, -1, -1, -1, -1, 0, 3, 6, 9, 12, 15, -1, -1, -1, -1, -1))),
      _mm_shuffle_epi8(a2, _mm_setr_epi8(-1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, 2, 5, 8, 11, 14)));
  b = _mm_or_si128(
      _mm_or_si128(_mm_shuffle_epi8(a0, _mm_setr_epi8(2, 5, 8, 11, 14, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1)),
                   _mm_shuffle_epi8(a1, _mm_setr_epi8(-1, -1, -1, -1, -1, 1, 4, 7, 10, 13, -1, -1, -1, -1, -1, -1))),
      _mm_shuffle_epi8(a2, _mm_setr_epi8(-1, -1, -1, -1, -1, -1, -1, -1, -1, -1, 0, 3, 6, 9, 12, 15)));
}

}  // namespace

void rgb_to_luma8_avx2(const Rgb* src, std::uint8_t* dst, std::size_t n) {
  const auto* bytes = reinterpret_cast<const std::uint8_t*>(src);
  const __m256i w_rg = _mm256_set1_epi32(static_cast<int>((kLumaWeightG << 16) | kLumaWeightR));
  const __m256i w_b1 = _mm256_set1_epi32(static_cast<int>((16384u << 16) | kLumaWeightB));
  const __m256i one = _mm256_set1_epi16(1);

  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    __m128i r8, g8, b8;
    deinterleave16(bytes + i * 3, r8, g8, b8);
    const __m256i r = _mm256_cvtepu8_epi16(r8);
    const __m256i g = _mm256_cvtepu8_epi16(g8);
    const __m256i b = _mm256_cvtepu8_epi16(b8);

    // (r,g) pairs and (b,1) pairs feed madd so each 32-bit lane gets
    // wR*r + wG*g and wB*b + 16384.
    const __m256i rg_lo = _mm256_unpacklo_epi16(r, g);
    const __m256i rg_hi = _mm256_unpackhi_epi16(r, g);
    const __m256i b1_lo = _mm256_unpacklo_epi16(b, one);
    const __m256i b1_hi = _mm256_unpackhi_epi16(b, one);

    const __m256i lo = _mm256_srli_epi32(
        _mm256_add_epi32(_mm256_madd_epi16(rg_lo, w_rg), _mm256_madd_epi16(b1_lo, w_b1)), 15);
    const __m256i hi = _mm256_srli_epi32(
        _mm256_add_epi32(_mm256_madd_epi16(rg_hi, w_rg), _mm256_madd_epi16(b1_hi, w_b1)), 15);

    // packus works per 128-bit lane, which undoes the unpack interleaving.
    const __m256i words = _mm256_packus_epi32(lo, hi);
    const __m128i out = _mm_packus_epi16(_mm256_castsi256_si128(words), _mm256_extracti128_si256(words, 1));
    _mm_storeu_si128(reinterpret_cast<__m128i*>(dst + i), out);
  }
  rgb_to_luma8_scalar(src + i, dst + i, n - i);
}

}  // namespace automap::kernels::detail
