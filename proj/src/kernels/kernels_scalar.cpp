#include "automap/kernels/kernels.hpp"

namespace automap::kernels::detail {

std::uint64_t sad_u8_scalar(const std::uint8_t* a, const std::uint8_t* b, std::size_t n) {
  std::uint64_t sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const int d = static_cast<int>(a[i]) - static_cast<int>(b[i]);
    sum += static_cast<std::uint64_t>(d < 0 ? -d : d);
  }
  return sum;
}

void rgb_to_luma8_scalar(const Rgb* src, std::uint8_t* dst, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = luma8(src[i]);
}

}  // namespace automap::kernels::detail
