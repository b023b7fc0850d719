#include "automap/core/types.hpp"
#include "automap/core/window.hpp"

#include <algorithm>
#include <charconv>

namespace automap {

std::string to_string(const TileKey& key) {
  std::string s = std::to_string(key.pattern) + ":" + std::to_string(key.palette) + ":" + std::to_string(key.bank);
  if (key.aux != 0) s += ":" + std::to_string(key.aux);
  return s;
}

namespace {

template <typename T>
bool parse_field(std::string_view text, T& out, std::uint64_t max) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty() || v > max) return false;
  out = static_cast<T>(v);
  return true;
}

}  // namespace

TileKey parse_tile_key(std::string_view text) {
  std::array<std::string_view, 4> parts{};
  std::size_t n = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == ':') {
      if (n == parts.size()) throw Error("malformed tile key '" + std::string(text) + "'");
      parts[n++] = text.substr(start, i - start);
      start = i + 1;
    }
  }
  TileKey key;
  bool ok = (n == 3 || n == 4) && parse_field(parts[0], key.pattern, 255) && parse_field(parts[1], key.palette, 7) &&
            parse_field(parts[2], key.bank, 0xffff);
  if (ok && n == 4) ok = parse_field(parts[3], key.aux, 0xffffffffu);
  if (!ok) throw Error("malformed tile key '" + std::string(text) + "'");
  return key;
}

Patch Patch::from_rgb(const std::array<Rgb, 64>& px) {
  Patch p;
  p.rgb = px;
  for (std::size_t i = 0; i < 64; ++i) p.luma[i] = luma8(px[i]);
  return p;
}

void Console::render_window_luma(const ScrollWindow& window, std::vector<std::uint8_t>& out) const {
  const Framebuffer fb = render();
  out.resize(static_cast<std::size_t>(window.w) * window.h);
  auto dst = out.begin();
  for (int y = window.y; y < window.y + window.h; ++y) {
    for (int x = window.x; x < window.x + window.w; ++x) *dst++ = luma8(fb.at(x, y));
  }
}

bool Console::window_luma_matches(const ScrollWindow& window, std::span<const std::uint8_t> expected) const {
  std::vector<std::uint8_t> luma;
  render_window_luma(window, luma);
  return std::equal(luma.begin(), luma.end(), expected.begin(), expected.end());
}

const Patch& placeholder_patch() {
  static const Patch patch = [] {
    std::array<Rgb, 64> px;
    px.fill(Rgb{255, 0, 255});
    return Patch::from_rgb(px);
  }();
  return patch;
}

std::string_view to_string(Mirroring m) {
  switch (m) {
    case Mirroring::Horizontal: return "horizontal";
    case Mirroring::Vertical: return "vertical";
    case Mirroring::FourScreen: return "four-screen";
    case Mirroring::SingleScreen: return "single-screen";
  }
  return "four-screen";
}

Mirroring parse_mirroring(std::string_view text) {
  if (text == "horizontal") return Mirroring::Horizontal;
  if (text == "vertical") return Mirroring::Vertical;
  if (text == "four-screen" || text == "four") return Mirroring::FourScreen;
  if (text == "single-screen" || text == "single") return Mirroring::SingleScreen;
  throw Error("unknown mirroring mode '" + std::string(text) + "'");
}

std::string_view to_string(TransitionKind kind) { return kind == TransitionKind::Scroll ? "scroll" : "teleport"; }

TransitionKind parse_transition_kind(std::string_view text) {
  if (text == "scroll") return TransitionKind::Scroll;
  if (text == "teleport") return TransitionKind::Teleport;
  throw Error("unknown transition kind '" + std::string(text) + "'");
}

int NametableView::physical_grid(Mirroring m, int quadrant) {
  switch (m) {
    case Mirroring::Vertical: return quadrant % 2;
    case Mirroring::Horizontal: return (quadrant / 2) * 2;
    case Mirroring::SingleScreen: return 0;
    case Mirroring::FourScreen: return quadrant;
  }
  return quadrant;
}

}  // namespace automap
