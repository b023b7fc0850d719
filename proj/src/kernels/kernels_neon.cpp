#include <arm_neon.h>

#include "automap/kernels/kernels.hpp"

namespace automap::kernels::detail {

std::uint64_t sad_u8_neon(const std::uint8_t* a, const std::uint8_t* b, std::size_t n) {
  uint32x4_t acc = vdupq_n_u32(0);
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    const uint8x16_t d = vabdq_u8(vld1q_u8(a + i), vld1q_u8(b + i));
    acc = vpadalq_u16(acc, vpaddlq_u8(d));
  }
  std::uint64_t sum = vaddlvq_u32(acc);
  return sum + sad_u8_scalar(a + i, b + i, n - i);
}

void rgb_to_luma8_neon(const Rgb* src, std::uint8_t* dst, std::size_t n) {
  const auto* bytes = reinterpret_cast<const std::uint8_t*>(src);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const uint8x8x3_t px = vld3_u8(bytes + i * 3);
    const uint16x8_t r = vmovl_u8(px.val[0]);
    const uint16x8_t g = vmovl_u8(px.val[1]);
    const uint16x8_t b = vmovl_u8(px.val[2]);

    uint32x4_t lo = vdupq_n_u32(16384);
    lo = vmlal_n_u16(lo, vget_low_u16(r), kLumaWeightR);
    lo = vmlal_n_u16(lo, vget_low_u16(g), kLumaWeightG);
    lo = vmlal_n_u16(lo, vget_low_u16(b), kLumaWeightB);
    uint32x4_t hi = vdupq_n_u32(16384);
    hi = vmlal_n_u16(hi, vget_high_u16(r), kLumaWeightR);
    hi = vmlal_n_u16(hi, vget_high_u16(g), kLumaWeightG);
    hi = vmlal_n_u16(hi, vget_high_u16(b), kLumaWeightB);

    const uint16x8_t words = vcombine_u16(vshrn_n_u32(lo, 15), vshrn_n_u32(hi, 15));
    vst1_u8(dst + i, vmovn_u16(words));
  }
  rgb_to_luma8_scalar(src + i, dst + i, n - i);
}

}  // namespace automap::kernels::detail
