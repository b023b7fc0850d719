#include <random>
#include <vector>

#include "automap/kernels/kernels.hpp"
#include "doctest.h"

using namespace automap;

namespace {

std::vector<kernels::Isa> simd_isas() {
  std::vector<kernels::Isa> out;
  for (auto isa : {kernels::Isa::Avx2, kernels::Isa::Neon}) {
    if (kernels::available(isa)) out.push_back(isa);
  }
  return out;
}

}  // namespace

TEST_CASE("scalar SAD matches a plain loop") {
  std::mt19937 rng(7);
  std::vector<std::uint8_t> a(100), b(100);
  for (auto& v : a) v = static_cast<std::uint8_t>(rng());
  for (auto& v : b) v = static_cast<std::uint8_t>(rng());
  std::uint64_t expect = 0;
  for (std::size_t i = 0; i < a.size(); ++i) expect += static_cast<std::uint64_t>(std::abs(a[i] - b[i]));
  CHECK(kernels::detail::sad_u8_scalar(a.data(), b.data(), a.size()) == expect);
}

TEST_CASE("scalar luma matches the Q15 formula") {
  for (int r : {0, 1, 127, 255}) {
    for (int g : {0, 64, 200, 255}) {
      for (int b : {0, 9, 255}) {
        const Rgb px{static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g), static_cast<std::uint8_t>(b)};
        std::uint8_t out = 0;
        kernels::detail::rgb_to_luma8_scalar(&px, &out, 1);
        CHECK(out == ((9798u * r + 19235u * g + 3735u * b + 16384u) >> 15));
      }
    }
  }
  const Rgb white{255, 255, 255};
  CHECK(luma8(white) == 255);
}

TEST_CASE("SIMD variants are bit-identical to scalar on every length and alignment") {
  std::mt19937 rng(11);
  std::vector<std::uint8_t> a(1100), b(1100);
  std::vector<Rgb> rgb(1100);
  for (auto& v : a) v = static_cast<std::uint8_t>(rng());
  for (auto& v : b) v = static_cast<std::uint8_t>(rng());
  for (auto& p : rgb) p = {static_cast<std::uint8_t>(rng()), static_cast<std::uint8_t>(rng()), static_cast<std::uint8_t>(rng())};
  // Extremes exercise saturation and rounding paths.
  for (std::size_t i = 0; i < 40; ++i) a[i] = 255, b[i] = 0, rgb[i] = {255, 255, 255};

  for (auto isa : simd_isas()) {
    const auto& t = kernels::table(isa);
    CAPTURE(kernels::to_string(isa));
    for (std::size_t off = 0; off < 5; ++off) {
      for (std::size_t n = 0; n < 1000; n += (n < 80 ? 1 : 37)) {
        CHECK(t.sad_u8(a.data() + off, b.data() + off + 1, n) ==
              kernels::detail::sad_u8_scalar(a.data() + off, b.data() + off + 1, n));
        std::vector<std::uint8_t> x(n + 1, 0xAA), y(n + 1, 0xAA);
        t.rgb_to_luma8(rgb.data() + off, x.data(), n);
        kernels::detail::rgb_to_luma8_scalar(rgb.data() + off, y.data(), n);
        CHECK(x == y);
        CHECK(x[n] == 0xAA);  // no write past the end
      }
    }
  }
}

TEST_CASE("selection can be forced and restored") {
  const auto before = kernels::active().isa;
  kernels::select(kernels::Isa::Scalar);
  CHECK(kernels::active().isa == kernels::Isa::Scalar);
  kernels::select(before);
  CHECK(kernels::active().isa == before);
  for (auto isa : {kernels::Isa::Avx2, kernels::Isa::Neon}) {
    if (!kernels::available(isa)) CHECK_THROWS_AS(kernels::table(isa), Error);
  }
}
