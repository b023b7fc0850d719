#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <set>

#include "automap/export/export.hpp"

namespace automap::exporter {

namespace {

const Patch& patch_or_placeholder(const PatternSheet& patterns, const TileKey& key) {
  if (const Patch* p = patterns.find(key)) return *p;
  static std::mutex mu;
  static std::set<TileKey> reported;
  std::lock_guard lock(mu);
  if (reported.insert(key).second) spdlog::warn("no pattern for tile {}; drawing placeholder", to_string(key));
  return placeholder_patch();
}

void blit_patch(Image& img, const Patch& patch, int x0, int y0, bool flip_h = false, bool flip_v = false) {
  for (int r = 0; r < kTilePx; ++r) {
    const int y = y0 + r;
    if (y < 0 || y >= img.height()) continue;
    const int sr = flip_v ? kTilePx - 1 - r : r;
    for (int c = 0; c < kTilePx; ++c) {
      const int x = x0 + c;
      if (x < 0 || x >= img.width()) continue;
      const int sc = flip_h ? kTilePx - 1 - c : c;
      img.at(x, y) = patch.rgb[static_cast<std::size_t>(sr * kTilePx + sc)];
    }
  }
}

void fill_rect(Image& img, int x0, int y0, int w, int h, Rgb c) {
  for (int y = std::max(0, y0); y < std::min(img.height(), y0 + h); ++y) {
    for (int x = std::max(0, x0); x < std::min(img.width(), x0 + w); ++x) img.at(x, y) = c;
  }
}

void outline(Image& img, int x0, int y0, int w, int h, int thickness, Rgb c) {
  fill_rect(img, x0, y0, w, thickness, c);
  fill_rect(img, x0, y0 + h - thickness, w, thickness, c);
  fill_rect(img, x0, y0, thickness, h, c);
  fill_rect(img, x0 + w - thickness, y0, thickness, h, c);
}

void line(Image& img, int x0, int y0, int x1, int y1, Rgb c) {
  const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  for (;;) {
    fill_rect(img, x0 - 1, y0 - 1, 3, 3, c);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) err += dy, x0 += sx;
    if (e2 <= dx) err += dx, y0 += sy;
  }
}

void arrow(Image& img, int x0, int y0, int x1, int y1, Rgb c) {
  line(img, x0, y0, x1, y1, c);
  const double ang = std::atan2(y1 - y0, x1 - x0);
  for (double side : {-0.5, 0.5}) {
    const int hx = x1 - static_cast<int>(std::lround(14 * std::cos(ang + side)));
    const int hy = y1 - static_cast<int>(std::lround(14 * std::sin(ang + side)));
    line(img, x1, y1, hx, hy, c);
  }
}

// 3x5 digits, one row per nibble-packed entry, most significant bit on the left.
constexpr std::uint8_t kDigits[10][5] = {
    {7, 5, 5, 5, 7}, {2, 6, 2, 2, 7}, {7, 1, 7, 4, 7}, {7, 1, 7, 1, 7}, {5, 5, 7, 1, 1},
    {7, 4, 7, 1, 7}, {7, 4, 7, 5, 7}, {7, 1, 1, 1, 1}, {7, 5, 7, 5, 7}, {7, 5, 7, 1, 7},
};

void draw_number(Image& img, int x0, int y0, int value, int scale, Rgb c) {
  const std::string s = std::to_string(value);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto& glyph = kDigits[s[i] - '0'];
    const int gx = x0 + static_cast<int>(i) * 4 * scale;
    for (int r = 0; r < 5; ++r) {
      for (int col = 0; col < 3; ++col) {
        if (glyph[r] & (4 >> col)) fill_rect(img, gx + col * scale, y0 + r * scale, scale, scale, c);
      }
    }
  }
}

constexpr Rgb kBackground{24, 24, 32};
constexpr Rgb kClusterBlue{40, 90, 230};
constexpr Rgb kNumberRed{230, 40, 40};
constexpr Rgb kLinkColor{240, 240, 240};
constexpr int kLabelStrip = 20;
constexpr int kGap = 16;
constexpr int kMaxRowWidth = 2048;

}  // namespace

Image rasterize(const tiles::NormalizedRoom& room, const PatternSheet& patterns, tiles::Representative rule) {
  Image img(room.width * kTilePx, room.height * kTilePx);
  const auto grid = room.representative_grid(rule);
  for (int y = 0; y < room.height; ++y) {
    for (int x = 0; x < room.width; ++x) {
      const auto& cell = grid[static_cast<std::size_t>(y) * room.width + x];
      if (cell) blit_patch(img, patch_or_placeholder(patterns, *cell), x * kTilePx, y * kTilePx);
    }
  }
  for (const auto& p : room.placements) {
    for (const auto& c : p.layout) {
      blit_patch(img, patch_or_placeholder(patterns, c.key), p.x + c.dx, p.y + c.dy, c.flip_h, c.flip_v);
    }
  }
  return img;
}

Image atlas(std::span<const tiles::NormalizedRoom> rooms, const rooms::RoomGraph& graph,
            std::span<const merge::Cluster> clusters, const PatternSheet& patterns, tiles::Representative rule) {
  struct Slot {
    int x = 0, y = 0, w = 0, h = 0;
  };
  std::vector<Slot> slot(rooms.size());
  auto index_of = [&](int id) -> int {
    for (std::size_t i = 0; i < rooms.size(); ++i) {
      if (rooms[i].id == id) return static_cast<int>(i);
    }
    return -1;
  };

  // Each cluster is a block of its rooms side by side; blocks flow left to right in rows.
  std::vector<std::vector<int>> blocks;
  std::vector<bool> placed(rooms.size(), false);
  for (const auto& c : clusters) {
    std::vector<int> b;
    for (int id : c.members) {
      const int i = index_of(id);
      if (i >= 0 && !placed[static_cast<std::size_t>(i)]) b.push_back(i), placed[static_cast<std::size_t>(i)] = true;
    }
    if (!b.empty()) blocks.push_back(std::move(b));
  }
  for (std::size_t i = 0; i < rooms.size(); ++i) {
    if (!placed[i]) blocks.push_back({static_cast<int>(i)});
  }
  std::sort(blocks.begin(), blocks.end(), [&](const auto& a, const auto& b) {
    return rooms[static_cast<std::size_t>(a.front())].id < rooms[static_cast<std::size_t>(b.front())].id;
  });

  struct Box {
    int x, y, w, h;
    bool outlined;
  };
  std::vector<Box> boxes;
  int cursor_x = kGap, cursor_y = kGap, row_h = 0, total_w = 0;
  for (const auto& b : blocks) {
    int bw = kGap, bh = 0;
    for (int i : b) {
      const auto& r = rooms[static_cast<std::size_t>(i)];
      bw += r.width * kTilePx + kGap;
      bh = std::max(bh, r.height * kTilePx + kLabelStrip);
    }
    bh += 2 * kGap;
    if (cursor_x > kGap && cursor_x + bw > kMaxRowWidth) {
      cursor_x = kGap;
      cursor_y += row_h + kGap;
      row_h = 0;
    }
    int x = cursor_x + kGap;
    for (int i : b) {
      const auto& r = rooms[static_cast<std::size_t>(i)];
      slot[static_cast<std::size_t>(i)] = {x, cursor_y + kGap + kLabelStrip, r.width * kTilePx, r.height * kTilePx};
      x += r.width * kTilePx + kGap;
    }
    boxes.push_back({cursor_x, cursor_y, bw, bh, b.size() > 1});
    cursor_x += bw + kGap;
    total_w = std::max(total_w, cursor_x);
    row_h = std::max(row_h, bh);
  }
  const int total_h = cursor_y + row_h + kGap;

  Image img(std::max(total_w, 1), std::max(total_h, 1));
  fill_rect(img, 0, 0, img.width(), img.height(), kBackground);
  for (std::size_t i = 0; i < rooms.size(); ++i) {
    const Image r = rasterize(rooms[i], patterns, rule);
    const Slot& s = slot[i];
    for (int y = 0; y < r.height(); ++y) std::copy(r.row(y).begin(), r.row(y).end(), img.row(s.y + y).begin() + s.x);
    draw_number(img, s.x, s.y - kLabelStrip + 2, rooms[i].id, 3, kNumberRed);
  }
  for (const auto& b : boxes) {
    if (b.outlined) outline(img, b.x, b.y, b.w, b.h, 3, kClusterBlue);
  }
  for (const auto& l : graph.links) {
    const int a = index_of(l.from_room), b = index_of(l.to_room);
    if (a < 0 || b < 0 || a == b) continue;
    const Slot& sa = slot[static_cast<std::size_t>(a)];
    const Slot& sb = slot[static_cast<std::size_t>(b)];
    arrow(img, sa.x + sa.w / 2, sa.y + sa.h / 2, sb.x + sb.w / 2, sb.y + sb.h / 2, kLinkColor);
  }
  return img;
}

}  // namespace automap::exporter
