#include "automap/scroll/scroll_detect.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>

#include "automap/kernels/kernels.hpp"

namespace automap::scroll {

LumaImage luminance(const Framebuffer& frame, const ScrollWindow& window) {
  LumaImage out{window.w, window.h, std::vector<float>(static_cast<std::size_t>(window.w) * window.h)};
  for (int y = 0; y < window.h; ++y) {
    const auto row = frame.row(window.y + y);
    for (int x = 0; x < window.w; ++x) {
      const Rgb c = row[static_cast<std::size_t>(window.x + x)];
      out.px[static_cast<std::size_t>(y) * window.w + x] =
          static_cast<float>((0.299 * c.r + 0.587 * c.g + 0.114 * c.b) / 255.0);
    }
  }
  return out;
}

Luma8Image luma8(const Framebuffer& frame, const ScrollWindow& window) {
  Luma8Image out(window.w, window.h);
  const auto& k = kernels::active();
  for (int y = 0; y < window.h; ++y) {
    k.rgb_to_luma8(frame.row(window.y + y).data() + window.x, out.row(y), static_cast<std::size_t>(window.w));
  }
  return out;
}

std::string_view to_string(Method m) { return m == Method::Nametable ? "nametable" : "consecutive"; }

Method parse_method(std::string_view text) {
  if (text == "nametable") return Method::Nametable;
  if (text == "consecutive") return Method::Consecutive;
  throw Error("unknown scroll method '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// Consecutive-frame registration

namespace {

struct Candidate {
  int dx, dy;
};

// Candidates in tie-break order, so the first one reaching the minimum cost wins.
std::vector<Candidate> consecutive_order(int radius, Delta previous) {
  std::vector<Candidate> c;
  c.reserve(static_cast<std::size_t>(2 * radius + 1) * (2 * radius + 1));
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) c.push_back({dx, dy});
  }
  auto key = [&](const Candidate& a) {
    const int ddx = a.dx - previous.dx, ddy = a.dy - previous.dy;
    return std::tuple(std::abs(a.dx) + std::abs(a.dy), ddx * ddx + ddy * ddy, a.dx, a.dy);
  };
  std::sort(c.begin(), c.end(), [&](const Candidate& a, const Candidate& b) { return key(a) < key(b); });
  return c;
}

}  // namespace

Registration register_consecutive(const Luma8Image& prev, const Luma8Image& cur, int radius, Delta previous) {
  if (prev.width != cur.width || prev.height != cur.height) throw Error("register_consecutive: image sizes differ");
  if (radius < 0) throw Error("register_consecutive: negative search radius");
  if (radius >= cur.width || radius >= cur.height) {
    throw Error("register_consecutive: search radius " + std::to_string(radius) +
                " leaves no guaranteed overlap in a " + std::to_string(cur.width) + "x" +
                std::to_string(cur.height) + " window");
  }
  const auto sad = kernels::active().sad_u8;
  const int w = cur.width, h = cur.height;

  bool have_best = false;
  std::uint64_t best_sad = 0, best_cnt = 1;
  Candidate best{0, 0};
  for (const Candidate& c : consecutive_order(radius, previous)) {
    const int x0 = std::max(0, -c.dx), x1 = std::min(w, w - c.dx);
    const int y0 = std::max(0, -c.dy), y1 = std::min(h, h - c.dy);
    const auto cnt = static_cast<std::uint64_t>(x1 - x0) * static_cast<std::uint64_t>(y1 - y0);
    std::uint64_t total = 0;
    bool worse = false;
    for (int y = y0; y < y1 && !worse; ++y) {
      total += sad(cur.row(y) + x0, prev.row(y + c.dy) + x0 + c.dx, static_cast<std::size_t>(x1 - x0));
      // Strictly worse already: total/cnt > best_sad/best_cnt.
      worse = have_best && total * best_cnt > best_sad * cnt;
    }
    if (worse) continue;
    if (!have_best || total * best_cnt < best_sad * cnt) {
      have_best = true;
      best_sad = total;
      best_cnt = cnt;
      best = c;
      if (best_sad == 0) break;
    }
  }
  return {{best.dx, best.dy}, static_cast<double>(best_sad) / static_cast<double>(best_cnt) / 255.0};
}

// ---------------------------------------------------------------------------
// Frame-vs-nametable registration

namespace {

void paint_cell(Luma8Image& out, int col, int row, const TileKey& key, const PatternSheet& patterns) {
  const Patch* p = patterns.find(key);
  if (!p) p = &placeholder_patch();
  for (int r = 0; r < kTilePx; ++r) {
    std::copy_n(p->luma.begin() + r * kTilePx, kTilePx, out.row(row * kTilePx + r) + col * kTilePx);
  }
}

}  // namespace

Luma8Image render_virtual_luma(const NametableView& nametables, const PatternSheet& patterns) {
  Luma8Image out(kVirtualWidthPx, kVirtualHeightPx);
  for (int row = 0; row < kVirtualRows; ++row) {
    for (int col = 0; col < kVirtualCols; ++col) paint_cell(out, col, row, nametables.cell(col, row), patterns);
  }
  return out;
}

const Luma8Image& VirtualLumaCache::update(const NametableView& nametables, const PatternSheet& patterns) {
  if (sheet_ != &patterns || luma_.px.empty() || keys_.mirroring() != nametables.mirroring()) {
    luma_ = render_virtual_luma(nametables, patterns);
    keys_ = nametables;
    sheet_ = &patterns;
    return luma_;
  }
  // Compare the physical grids and repaint every virtual quadrant they back.
  for (int q = 0; q < 4; ++q) {
    const int phys = NametableView::physical_grid(nametables.mirroring(), q);
    const auto& before = keys_.grid(phys);
    const auto& now = nametables.grid(phys);
    for (std::size_t i = 0; i < now.size(); ++i) {
      if (before[i] == now[i]) continue;
      const int col = (q % 2) * kNametableCols + static_cast<int>(i) % kNametableCols;
      const int row = (q / 2) * kNametableRows + static_cast<int>(i) / kNametableCols;
      paint_cell(luma_, col, row, now[i], patterns);
    }
  }
  keys_ = nametables;
  return luma_;
}

std::vector<Rect> sprite_rects(std::span<const SpriteEntry> sprites) {
  std::vector<Rect> out;
  for (const auto& s : sprites) {
    if (s.visible) out.push_back({s.x, s.y, kTilePx, kTilePx});
  }
  return out;
}

namespace {

struct Run {
  int y, x0, x1;
};

std::vector<Run> unmasked_runs(const ScrollWindow& window, std::span<const Rect> masked) {
  std::vector<Run> runs;
  std::vector<std::uint8_t> hidden(static_cast<std::size_t>(window.w));
  for (int y = 0; y < window.h; ++y) {
    std::fill(hidden.begin(), hidden.end(), 0);
    const int sy = window.y + y;
    for (const Rect& r : masked) {
      if (sy < r.y || sy >= r.y + r.h) continue;
      const int a = std::max(r.x - window.x, 0), b = std::min(r.x + r.w - window.x, window.w);
      for (int x = a; x < b; ++x) hidden[static_cast<std::size_t>(x)] = 1;
    }
    int x = 0;
    while (x < window.w) {
      while (x < window.w && hidden[static_cast<std::size_t>(x)]) ++x;
      const int start = x;
      while (x < window.w && !hidden[static_cast<std::size_t>(x)]) ++x;
      if (x > start) runs.push_back({y, start, x});
    }
  }
  return runs;
}

int torus(int d, int m) {
  d = std::abs(d) % m;
  return std::min(d, m - d);
}

struct TieKey {
  int chebyshev, manhattan, y, x;
  friend constexpr auto operator<=>(const TieKey&, const TieKey&) = default;
};

TieKey tie_key(int x, int y, ScrollRegister hint) {
  const int ex = torus(x - hint.x, kVirtualWidthPx), ey = torus(y - hint.y, kVirtualHeightPx);
  return {std::max(ex, ey), ex + ey, y, x};
}

// Offsets of the local search in tie-break order (Chebyshev rings, then Manhattan).
const std::vector<Candidate>& local_order() {
  static const std::vector<Candidate> order = [] {
    constexpr int kLocal = 32;
    std::vector<Candidate> c;
    for (int dy = -kLocal; dy <= kLocal; ++dy) {
      for (int dx = -kLocal; dx <= kLocal; ++dx) c.push_back({dx, dy});
    }
    std::stable_sort(c.begin(), c.end(), [](const Candidate& a, const Candidate& b) {
      const auto ka = std::pair(std::max(std::abs(a.dx), std::abs(a.dy)), std::abs(a.dx) + std::abs(a.dy));
      const auto kb = std::pair(std::max(std::abs(b.dx), std::abs(b.dy)), std::abs(b.dx) + std::abs(b.dy));
      return ka < kb;
    });
    return c;
  }();
  return order;
}

// Virtual tilemap extended by the window size so every wrapped candidate is contiguous.
Luma8Image pad_wrapped(const Luma8Image& v, int w, int h) {
  Luma8Image out(kVirtualWidthPx + w, kVirtualHeightPx + h);
  for (int y = 0; y < out.height; ++y) {
    const std::uint8_t* src = v.row(y % kVirtualHeightPx);
    std::uint8_t* dst = out.row(y);
    std::copy_n(src, kVirtualWidthPx, dst);
    std::copy_n(src, w, dst + kVirtualWidthPx);
  }
  return out;
}

}  // namespace

NametablePosition register_nametable(const Luma8Image& window_luma, const Luma8Image& virtual_luma,
                                     const ScrollWindow& window, ScrollRegister hint, std::span<const Rect> masked) {
  if (window_luma.width != window.w || window_luma.height != window.h) {
    throw Error("register_nametable: luma does not match the scroll window");
  }
  if (virtual_luma.width != kVirtualWidthPx || virtual_luma.height != kVirtualHeightPx) {
    throw Error("register_nametable: virtual tilemap must be 512x480");
  }
  hint.x = ((hint.x % kVirtualWidthPx) + kVirtualWidthPx) % kVirtualWidthPx;
  hint.y = ((hint.y % kVirtualHeightPx) + kVirtualHeightPx) % kVirtualHeightPx;

  const auto runs = unmasked_runs(window, masked);
  std::uint64_t count = 0;
  for (const Run& r : runs) count += static_cast<std::uint64_t>(r.x1 - r.x0);
  if (count == 0) return {hint.x, hint.y, 0.0};

  const Luma8Image padded = pad_wrapped(virtual_luma, window.w, window.h);
  const auto sad = kernels::active().sad_u8;

  // Candidates are scroll positions; the window's top-left then sits at
  // (sx + window.x, sy + window.y) in the tilemap.
  auto cost_at = [&](int sx, int sy, std::uint64_t limit) {
    const int px = (sx + window.x) % kVirtualWidthPx, py = (sy + window.y) % kVirtualHeightPx;
    std::uint64_t total = 0;
    for (const Run& r : runs) {
      total += sad(window_luma.row(r.y) + r.x0, padded.row(py + r.y) + px + r.x0, static_cast<std::size_t>(r.x1 - r.x0));
      if (total > limit) break;
    }
    return total;
  };

  std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
  int best_x = hint.x, best_y = hint.y;
  TieKey best_key = tie_key(best_x, best_y, hint);
  for (const Candidate& c : local_order()) {
    const int sx = (hint.x + c.dx + kVirtualWidthPx) % kVirtualWidthPx;
    const int sy = (hint.y + c.dy + kVirtualHeightPx) % kVirtualHeightPx;
    const std::uint64_t s = cost_at(sx, sy, best);
    const TieKey k = tie_key(sx, sy, hint);
    if (s < best || (s == best && k < best_key)) {
      best = s;
      best_x = sx;
      best_y = sy;
      best_key = k;
      if (best == 0) break;
    }
  }

  if (best != 0) {
    for (int sy = 0; sy < kVirtualHeightPx; ++sy) {
      for (int sx = 0; sx < kVirtualWidthPx; ++sx) {
        const std::uint64_t s = cost_at(sx, sy, best);
        if (s > best) continue;
        const TieKey k = tie_key(sx, sy, hint);
        if (s < best || k < best_key) {
          best = s;
          best_x = sx;
          best_y = sy;
          best_key = k;
        }
      }
    }
  }
  return {best_x, best_y, static_cast<double>(best) / static_cast<double>(count) / 255.0};
}

NametablePosition register_nametable(const Luma8Image& window_luma, const NametableView& nametables,
                                     const PatternSheet& patterns, const ScrollWindow& window, ScrollRegister hint,
                                     std::span<const Rect> masked) {
  return register_nametable(window_luma, render_virtual_luma(nametables, patterns), window, hint, masked);
}

// ---------------------------------------------------------------------------
// Integration

int unwrap_delta(int prev, int cur, int modulus) {
  int d = ((cur - prev) % modulus + modulus) % modulus;
  if (d > modulus / 2) d -= modulus;
  return d;
}

Delta nametable_delta(ScrollRegister prev, ScrollRegister cur) {
  return {unwrap_delta(prev.x, cur.x, kVirtualWidthPx), unwrap_delta(prev.y, cur.y, kVirtualHeightPx)};
}

ScrollSample ScrollIntegrator::push(FrameIndex frame, Delta delta, Method method, double confidence) {
  if (restart_) {
    sx_ = sy_ = 0;
    restart_ = false;
  } else {
    sx_ += delta.dx;
    sy_ += delta.dy;
  }
  return {frame, delta, sx_, sy_, method, confidence};
}

std::vector<ScrollSample> integrate(std::span<const ScrollEvent> events, std::span<const FrameIndex> room_starts) {
  std::vector<ScrollSample> out;
  out.reserve(events.size());
  ScrollIntegrator integ;
  std::size_t next_start = 0;
  for (const auto& e : events) {
    bool restart = false;
    while (next_start < room_starts.size() && room_starts[next_start] <= e.frame) {
      restart = true;
      ++next_start;
    }
    if (restart) integ.reset();
    out.push_back(integ.push(e.frame, e.delta, e.method, e.confidence));
  }
  return out;
}

}  // namespace automap::scroll
