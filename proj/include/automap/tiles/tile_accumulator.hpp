#pragma once

#include <optional>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "automap/core/types.hpp"
#include "automap/core/window.hpp"

namespace automap::tiles {

/// Frames [start, end) during which a coordinate showed `key`.
struct Interval {
  FrameIndex start = 0;
  FrameIndex end = 0;
  TileKey key;
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Content history of one coordinate, ordered by time.
using TileHistory = std::vector<Interval>;

enum class Representative { Quarter, Mode };

std::string_view to_string(Representative r);
Representative parse_representative(std::string_view text);

/// Key shown a quarter of the way into the coordinate's observed span (gaps
/// count toward the span and resolve to the interval before them), or the key
/// shown for the most frames with `Mode` (earliest key wins ties).
TileKey representative(const TileHistory& history, Representative rule = Representative::Quarter);

struct Coord {
  int x = 0;
  int y = 0;
  friend constexpr auto operator<=>(const Coord&, const Coord&) = default;
};

struct CoordHash {
  std::size_t operator()(Coord c) const noexcept {
    return std::hash<std::uint64_t>{}((static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.x)) << 32) |
                                      static_cast<std::uint32_t>(c.y));
  }
};

/// One sprite of an object's layout, relative to the object's anchor.
struct LayoutCell {
  int dx = 0;
  int dy = 0;
  TileKey key;
  bool flip_h = false;
  bool flip_v = false;
  friend auto operator<=>(const LayoutCell&, const LayoutCell&) = default;
};

/// Where a game object was first seen, in room pixels.
struct ObjectPlacement {
  int track = 0;
  FrameIndex frame = 0;
  int x = 0;
  int y = 0;
  std::vector<LayoutCell> layout;
  friend bool operator==(const ObjectPlacement&, const ObjectPlacement&) = default;
};

/// A closed room with coordinates shifted so the tight bounding box starts at 0.
struct NormalizedRoom {
  int id = 0;
  int width = 0;   // tiles
  int height = 0;  // tiles
  /// Added to accumulator coordinates to get grid coordinates.
  int offset_x = 0;
  int offset_y = 0;
  /// Grid pixel of the scroll window's top-left on the room's first frame.
  int origin_px_x = 0;
  int origin_px_y = 0;
  FrameIndex first_frame = 0;
  FrameIndex end_frame = 0;
  /// Row-major; an empty history means the cell was never observed.
  std::vector<TileHistory> cells;
  std::vector<ObjectPlacement> placements;

  const TileHistory& at(int x, int y) const { return cells[static_cast<std::size_t>(y) * width + x]; }
  bool observed(int x, int y) const { return !at(x, y).empty(); }
  /// Representative key per cell, nullopt where unobserved.
  std::vector<std::optional<TileKey>> representative_grid(Representative rule = Representative::Quarter) const;

  friend bool operator==(const NormalizedRoom&, const NormalizedRoom&) = default;
};

/// Tile histories of the room being explored, keyed by tile coordinates whose
/// origin is the tile under the scroll window's top-left on the room's first
/// observed frame.
class RoomAccumulator {
 public:
  explicit RoomAccumulator(int id = 0) : id_(id) {}

  /// Records every tile of `window` that is at least half visible in both
  /// axes. `scroll` is the hardware scroll position (screen top-left in the
  /// tilemap) and (sx, sy) the window's world offset since the room started.
  /// The observation stands for frames [t, end).
  void observe(const NametableView& nametables, ScrollRegister scroll, const ScrollWindow& window, int sx, int sy,
               FrameIndex t, FrameIndex end);

  /// Shorthand for a single-frame observation.
  void observe(const NametableView& nametables, ScrollRegister scroll, const ScrollWindow& window, int sx, int sy,
               FrameIndex t) {
    observe(nametables, scroll, window, sx, sy, t, t + 1);
  }

  /// Tile-aligned room pixel of window pixel (wx, wy) at world offset (sx, sy).
  int room_px_x(int wx, int sx) const { return wx + sx + phase_x_; }
  int room_px_y(int wy, int sy) const { return wy + sy + phase_y_; }

  /// Throws `Error` when nothing was observed.
  NormalizedRoom close() const;

  int id() const { return id_; }
  bool empty() const { return cells_.empty(); }
  std::size_t size() const { return cells_.size(); }
  const std::unordered_map<Coord, TileHistory, CoordHash>& cells() const { return cells_; }
  const TileHistory* history(Coord c) const;
  FrameIndex first_frame() const { return first_frame_; }
  FrameIndex end_frame() const { return end_frame_; }

 private:
  void record(Coord c, const TileKey& key, FrameIndex t, FrameIndex end);

  int id_;
  bool started_ = false;
  int phase_x_ = 0;
  int phase_y_ = 0;
  FrameIndex first_frame_ = 0;
  FrameIndex end_frame_ = 0;
  std::unordered_map<Coord, TileHistory, CoordHash> cells_;
};

}  // namespace automap::tiles
