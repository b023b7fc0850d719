#include <random>

#include "automap/scroll/scroll_detect.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace automap;
using namespace automap::scroll;

namespace {

Luma8Image random_image(int w, int h, std::mt19937& rng, int levels) {
  Luma8Image img(w, h);
  std::uniform_int_distribution<int> v(0, levels - 1);
  for (auto& p : img.px) p = static_cast<std::uint8_t>(v(rng) * (255 / std::max(1, levels - 1)));
  return img;
}

/// `prev` seen through a camera that moved by d; uncovered pixels are fresh noise.
Luma8Image shifted(const Luma8Image& prev, Delta d, std::mt19937& rng) {
  Luma8Image out(prev.width, prev.height);
  std::uniform_int_distribution<int> v(0, 255);
  for (int y = 0; y < prev.height; ++y) {
    for (int x = 0; x < prev.width; ++x) {
      const int px = x + d.dx, py = y + d.dy;
      out.at(x, y) = (px >= 0 && py >= 0 && px < prev.width && py < prev.height) ? prev.at(px, py)
                                                                                : static_cast<std::uint8_t>(v(rng));
    }
  }
  return out;
}

struct Tilemap {
  NametableView nt;
  PatternSheet sheet;
};

Tilemap random_tilemap(std::mt19937& rng, int distinct = 200) {
  Tilemap t;
  std::uniform_int_distribution<int> pick(0, distinct - 1);
  for (int i = 0; i < distinct; ++i) {
    std::array<Rgb, 64> px;
    for (auto& p : px) p = {static_cast<std::uint8_t>(rng()), static_cast<std::uint8_t>(rng()), static_cast<std::uint8_t>(rng())};
    t.sheet.set(TileKey{static_cast<std::uint8_t>(i % 256), static_cast<std::uint8_t>(i / 256), 0, 0}, Patch::from_rgb(px));
  }
  for (int r = 0; r < kVirtualRows; ++r) {
    for (int c = 0; c < kVirtualCols; ++c) {
      const int i = pick(rng);
      t.nt.set_cell(c, r, TileKey{static_cast<std::uint8_t>(i % 256), static_cast<std::uint8_t>(i / 256), 0, 0});
    }
  }
  return t;
}

/// Window luma cut from the virtual tilemap at scroll position s.
Luma8Image cut(const Luma8Image& virt, ScrollRegister s, const ScrollWindow& w) {
  Luma8Image out(w.w, w.h);
  for (int y = 0; y < w.h; ++y)
    for (int x = 0; x < w.w; ++x)
      out.at(x, y) = virt.at((s.x + w.x + x) % kVirtualWidthPx, (s.y + w.y + y) % kVirtualHeightPx);
  return out;
}

}  // namespace

TEST_CASE("consecutive registration agrees with the brute-force oracle on 1000 random cases") {
  std::mt19937 rng(2024);
  int exact_shift_cases = 0;
  for (int i = 0; i < 1000; ++i) {
    const int radius = std::uniform_int_distribution<int>(0, 8)(rng);
    const int w = std::uniform_int_distribution<int>(radius + 1, 64)(rng);
    const int h = std::uniform_int_distribution<int>(radius + 1, 64)(rng);
    // Few grey levels make ties common; many make the true shift unique.
    const int levels = std::array{2, 3, 16, 256}[static_cast<std::size_t>(i % 4)];
    const Luma8Image prev = random_image(w, h, rng, levels);
    std::uniform_int_distribution<int> sh(-radius, radius);
    const Delta truth{sh(rng), sh(rng)};
    const Delta previous{sh(rng), sh(rng)};
    const Luma8Image cur = (i % 5 == 4) ? random_image(w, h, rng, levels) : shifted(prev, truth, rng);
    CAPTURE(i);
    CAPTURE(w);
    CAPTURE(h);
    CAPTURE(radius);
    const Registration r = register_consecutive(prev, cur, radius, previous);
    const Delta expect = oracle::register_brute(prev, cur, radius, previous);
    CHECK(r.delta == expect);
    if (i % 5 != 4 && levels == 256 && w > 2 * radius + 4 && h > 2 * radius + 4) {
      ++exact_shift_cases;
      CHECK(r.delta == truth);
      CHECK(r.cost == doctest::Approx(0.0));
    }
  }
  CHECK(exact_shift_cases > 50);
}

TEST_CASE("consecutive registration validates its inputs") {
  Luma8Image a(16, 16), b(16, 8);
  CHECK_THROWS_AS(register_consecutive(a, b, 2), Error);
  CHECK_THROWS_AS(register_consecutive(a, a, 16), Error);
  CHECK_THROWS_AS(register_consecutive(a, a, -1), Error);
  // A flat image: every shift costs zero, so the zero shift wins.
  CHECK(register_consecutive(a, a, 4, {3, 3}).delta == Delta{0, 0});
}

TEST_CASE("ties prefer small motion, then continuity with the previous delta") {
  // Vertical stripes of period 2: shifts by an even dx are all perfect.
  Luma8Image a(20, 10);
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 20; ++x) a.at(x, y) = static_cast<std::uint8_t>((x % 2) * 200);
  Luma8Image b = a;
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 20; ++x) b.at(x, y) = static_cast<std::uint8_t>(((x + 1) % 2) * 200);
  // Odd dx explains b; |dx| = 1 ties between -1 and +1, broken by the previous delta.
  CHECK(register_consecutive(a, b, 4, {1, 0}).delta == Delta{1, 0});
  CHECK(register_consecutive(a, b, 4, {-3, 0}).delta == Delta{-1, 0});
  CHECK(register_consecutive(a, b, 4, {0, 0}).delta == Delta{-1, 0});  // lexicographic last resort
}

TEST_CASE("nametable registration finds the scroll position, including across the wrap") {
  std::mt19937 rng(77);
  const Tilemap t = random_tilemap(rng);
  const Luma8Image virt = render_virtual_luma(t.nt, t.sheet);
  for (const ScrollWindow w : {ScrollWindow{}, ScrollWindow{0, 16, 256, 224}, ScrollWindow{8, 0, 248, 240}}) {
    for (int i = 0; i < 12; ++i) {
      const ScrollRegister s{std::uniform_int_distribution<int>(0, 511)(rng), std::uniform_int_distribution<int>(0, 479)(rng)};
      const ScrollRegister hint = (i % 2) ? s : ScrollRegister{(s.x + 200) % 512, (s.y + 100) % 480};
      const auto luma = cut(virt, s, w);
      const auto got = register_nametable(luma, t.nt, t.sheet, w, hint);
      CAPTURE(i);
      CHECK(got.x == s.x);
      CHECK(got.y == s.y);
      CHECK(got.cost == 0.0);
    }
  }
}

TEST_CASE("the cached tilemap render matches a full render after every edit") {
  std::mt19937 rng(79);
  Tilemap t = random_tilemap(rng);
  VirtualLumaCache cache;
  std::uniform_int_distribution<int> col(0, kVirtualCols - 1), row(0, kVirtualRows - 1), key(0, 199), edits(0, 40);
  for (int step = 0; step < 60; ++step) {
    if (step == 20) t.nt.set_mirroring(Mirroring::Vertical);
    if (step == 40) t.nt.set_mirroring(Mirroring::Horizontal);
    for (int e = edits(rng); e > 0; --e) {
      const int k = key(rng);
      t.nt.set_cell(col(rng), row(rng), TileKey{static_cast<std::uint8_t>(k % 256), static_cast<std::uint8_t>(k / 256), 0, 0});
    }
    CAPTURE(step);
    CHECK(cache.update(t.nt, t.sheet).px == render_virtual_luma(t.nt, t.sheet).px);
  }
}

TEST_CASE("masked sprite rectangles do not disturb nametable registration") {
  std::mt19937 rng(78);
  const Tilemap t = random_tilemap(rng);
  const Luma8Image virt = render_virtual_luma(t.nt, t.sheet);
  const ScrollRegister s{300, 400};
  auto luma = cut(virt, s, {});
  std::vector<Rect> masks;
  for (int k = 0; k < 20; ++k) {
    const Rect r{std::uniform_int_distribution<int>(0, 247)(rng), std::uniform_int_distribution<int>(0, 231)(rng), 8, 8};
    masks.push_back(r);
    for (int y = r.y; y < r.y + 8; ++y)
      for (int x = r.x; x < r.x + 8; ++x) luma.at(x, y) = 255;
  }
  const auto masked = register_nametable(luma, virt, {}, {296, 398}, masks);
  CHECK(masked.x == 300);
  CHECK(masked.y == 400);
  CHECK(masked.cost == 0.0);
}

TEST_CASE("a featureless tilemap resolves to the hint") {
  NametableView nt;
  PatternSheet sheet;
  std::array<Rgb, 64> grey;
  grey.fill({90, 90, 90});
  sheet.set(TileKey{}, Patch::from_rgb(grey));
  const Luma8Image luma(256, 240);
  const Luma8Image virt = render_virtual_luma(nt, sheet);
  Luma8Image flat = cut(virt, {0, 0}, {});
  const auto p = register_nametable(flat, nt, sheet, {}, {123, 45});
  CHECK(p.x == 123);
  CHECK(p.y == 45);
  CHECK_THROWS_AS(register_nametable(luma, nt, sheet, ScrollWindow{0, 0, 128, 120}), Error);
}

TEST_CASE("wrapped positions unwrap into signed steps") {
  CHECK(unwrap_delta(500, 4, 512) == 16);
  CHECK(unwrap_delta(4, 500, 512) == -16);
  CHECK(unwrap_delta(0, 256, 512) == 256);  // exactly half: positive side
  CHECK(unwrap_delta(0, 257, 512) == -255);
  CHECK(nametable_delta({510, 2}, {2, 478}) == Delta{4, -4});
}

TEST_CASE("the integrator restarts offsets at room starts") {
  std::vector<ScrollEvent> ev;
  for (int f = 0; f < 6; ++f) ev.push_back({f, {2, -1}, Method::Nametable, 1.0});
  const std::vector<FrameIndex> starts{0, 3};
  const auto s = integrate(ev, starts);
  CHECK(s[0].sx == 0);
  CHECK(s[2].sx == 4);
  CHECK(s[2].sy == -2);
  CHECK(s[3].sx == 0);
  CHECK(s[5].sx == 4);
  ScrollIntegrator integ;
  CHECK(integ.push(0, {5, 5}, Method::Consecutive, 1).sx == 0);
  CHECK(integ.push(1, {5, 5}, Method::Consecutive, 1).sx == 5);
  integ.reset();
  CHECK(integ.push(2, {5, 5}, Method::Consecutive, 1).sx == 0);
}

TEST_CASE("luminance uses the standard weights") {
  Framebuffer fb(4, 1);
  fb.at(0, 0) = {255, 0, 0};
  fb.at(1, 0) = {0, 255, 0};
  fb.at(2, 0) = {0, 0, 255};
  fb.at(3, 0) = {255, 255, 255};
  const auto l = luminance(fb, {0, 0, 4, 1});
  CHECK(l.at(0, 0) == doctest::Approx(0.299));
  CHECK(l.at(1, 0) == doctest::Approx(0.587));
  CHECK(l.at(2, 0) == doctest::Approx(0.114));
  CHECK(l.at(3, 0) == doctest::Approx(1.0));
  const auto q = luma8(fb, {0, 0, 4, 1});
  CHECK(q.at(0, 0) == 76);
  CHECK(q.at(3, 0) == 255);
  CHECK(parse_method("consecutive") == Method::Consecutive);
  CHECK_THROWS_AS(parse_method("optical-flow"), Error);
}
