#include "automap/tiles/tile_accumulator.hpp"

#include <algorithm>
#include <climits>
#include <map>

namespace automap::tiles {

std::string_view to_string(Representative r) { return r == Representative::Quarter ? "quarter" : "mode"; }

Representative parse_representative(std::string_view text) {
  if (text == "quarter") return Representative::Quarter;
  if (text == "mode") return Representative::Mode;
  throw Error("unknown representative rule '" + std::string(text) + "' (expected quarter or mode)");
}

TileKey representative(const TileHistory& history, Representative rule) {
  if (history.empty()) throw Error("representative of an empty tile history");
  if (rule == Representative::Mode) {
    std::map<TileKey, FrameIndex> duration;
    std::vector<TileKey> order;
    for (const auto& iv : history) {
      auto [it, fresh] = duration.try_emplace(iv.key, 0);
      if (fresh) order.push_back(iv.key);
      it->second += iv.end - iv.start;
    }
    TileKey best = order.front();
    for (const auto& k : order) {
      if (duration[k] > duration[best]) best = k;
    }
    return best;
  }
  const FrameIndex start = history.front().start;
  const FrameIndex end = history.back().end;
  const FrameIndex q = start + (end - start) / 4;
  const Interval* pick = &history.front();
  for (const auto& iv : history) {
    if (iv.start > q) break;
    pick = &iv;
  }
  return pick->key;
}

std::vector<std::optional<TileKey>> NormalizedRoom::representative_grid(Representative rule) const {
  std::vector<std::optional<TileKey>> out(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!cells[i].empty()) out[i] = representative(cells[i], rule);
  }
  return out;
}

namespace {

int floor_div(int a, int b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }
int wrap(int a, int m) { return ((a % m) + m) % m; }

}  // namespace

const TileHistory* RoomAccumulator::history(Coord c) const {
  auto it = cells_.find(c);
  return it == cells_.end() ? nullptr : &it->second;
}

void RoomAccumulator::record(Coord c, const TileKey& key, FrameIndex t, FrameIndex end) {
  TileHistory& h = cells_[c];
  if (!h.empty()) {
    Interval& last = h.back();
    if (t < last.start) return;  // out-of-order observation; history only moves forward
    if (last.key == key) {
      last.end = std::max(last.end, end);
      return;
    }
    if (t < last.end) {
      // The previous interval was assumed to last until `end` of its
      // observation; the change proves otherwise.
      last.end = t;
      if (last.end == last.start) {
        h.pop_back();
        if (!h.empty() && h.back().key == key) {
          h.back().end = std::max(h.back().end, end);
          return;
        }
      }
    }
  }
  h.push_back({t, end, key});
}

void RoomAccumulator::observe(const NametableView& nametables, ScrollRegister scroll, const ScrollWindow& window,
                              int sx, int sy, FrameIndex t, FrameIndex end) {
  const int vx0 = scroll.x + window.x;  // tilemap pixel under the window's top-left
  const int vy0 = scroll.y + window.y;
  if (!started_) {
    started_ = true;
    phase_x_ = wrap(vx0, kTilePx);
    phase_y_ = wrap(vy0, kTilePx);
    first_frame_ = t;
  }
  end_frame_ = std::max(end_frame_, end);

  // Window-relative start of the first tile that touches the window.
  const int wx_first = -wrap(vx0, kTilePx);
  const int wy_first = -wrap(vy0, kTilePx);
  constexpr int kHalf = kTilePx / 2;
  for (int wy = wy_first; wy < window.h; wy += kTilePx) {
    const int vis_h = std::min(wy + kTilePx, window.h) - std::max(wy, 0);
    if (vis_h < kHalf) continue;
    const int vrow = floor_div(vy0 + wy, kTilePx);
    const int ry = floor_div(room_px_y(wy, sy), kTilePx);
    for (int wx = wx_first; wx < window.w; wx += kTilePx) {
      const int vis_w = std::min(wx + kTilePx, window.w) - std::max(wx, 0);
      if (vis_w < kHalf) continue;
      const int vcol = floor_div(vx0 + wx, kTilePx);
      record({floor_div(room_px_x(wx, sx), kTilePx), ry}, nametables.cell(vcol, vrow), t, end);
    }
  }
}

NormalizedRoom RoomAccumulator::close() const {
  if (cells_.empty()) throw Error("room " + std::to_string(id_) + " has no observed tiles");
  int min_x = INT_MAX, min_y = INT_MAX, max_x = INT_MIN, max_y = INT_MIN;
  for (const auto& [c, h] : cells_) {
    min_x = std::min(min_x, c.x);
    min_y = std::min(min_y, c.y);
    max_x = std::max(max_x, c.x);
    max_y = std::max(max_y, c.y);
  }
  NormalizedRoom room;
  room.id = id_;
  room.width = max_x - min_x + 1;
  room.height = max_y - min_y + 1;
  room.offset_x = -min_x;
  room.offset_y = -min_y;
  room.origin_px_x = phase_x_ + kTilePx * room.offset_x;
  room.origin_px_y = phase_y_ + kTilePx * room.offset_y;
  room.first_frame = first_frame_;
  room.end_frame = end_frame_;
  room.cells.resize(static_cast<std::size_t>(room.width) * room.height);
  for (const auto& [c, h] : cells_) {
    room.cells[static_cast<std::size_t>(c.y - min_y) * room.width + (c.x - min_x)] = h;
  }
  return room;
}

}  // namespace automap::tiles
