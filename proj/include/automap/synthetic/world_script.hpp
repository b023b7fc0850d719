#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "automap/core/types.hpp"

namespace automap::synthetic {

/// Half-open frame range [begin, end).
struct FrameRange {
  FrameIndex begin = 0;
  FrameIndex end = 0;

  bool contains(FrameIndex t) const { return t >= begin && t < end; }
  FrameIndex length() const { return end - begin; }
  friend bool operator==(const FrameRange&, const FrameRange&) = default;
};

struct World {
  std::string name;
  int width = 0;   // tiles
  int height = 0;  // tiles
  std::vector<TileKey> tiles;  // row-major

  const TileKey& at(int x, int y) const { return tiles[static_cast<std::size_t>(y) * width + x]; }
  TileKey& at(int x, int y) { return tiles[static_cast<std::size_t>(y) * width + x]; }
};

struct ScrollSegment {
  FrameRange frames;
  int dx = 0;
  int dy = 0;
  int line = 0;
};

struct ControlWindow {
  FrameRange frames;
  int line = 0;
  friend bool operator==(const ControlWindow& a, const ControlWindow& b) { return a.frames == b.frames; }
};

/// Input is ignored and the camera moves by (dx, dy) each frame.
struct AutoscrollWindow {
  FrameRange frames;
  int dx = 0;
  int dy = 0;
  int line = 0;
};

struct TileChange {
  std::string world;
  int x = 0;
  int y = 0;
  FrameIndex frame = 0;
  TileKey key;
  int line = 0;
};

struct PixelPoint {
  int x = 0;
  int y = 0;
  friend bool operator==(const PixelPoint&, const PixelPoint&) = default;
};

/// A scripted object made of one or more 8x8 hardware sprites, moving linearly
/// in world pixel coordinates over its frame range.
struct SpriteTrack {
  std::string id;
  FrameRange frames;
  PixelPoint from;
  PixelPoint to;
  /// Sprite layout as rows of keys; cell (c, r) sits at offset (8c, 8r).
  std::vector<std::vector<TileKey>> tiles;
  /// When set, the track only exists while this world is active.
  std::optional<std::string> world;
  int line = 0;

  PixelPoint position_at(FrameIndex t) const;
};

struct Teleport {
  FrameIndex frame = 0;
  std::string world;
  int x = 0;  // camera, world pixels
  int y = 0;
  int line = 0;
};

/// Everything a synthetic console plays back. Produced by `parse_script` or
/// built directly in code.
struct WorldScript {
  std::vector<World> worlds;
  std::map<TileKey, Patch> palette;

  std::string start_world;  // defaults to the first world
  int start_x = 0;
  int start_y = 0;
  Mirroring mirroring = Mirroring::FourScreen;

  std::vector<ScrollSegment> scrolls;
  std::vector<ControlWindow> controls;
  std::vector<AutoscrollWindow> autoscrolls;
  std::vector<TileChange> tile_changes;
  std::vector<SpriteTrack> sprites;
  std::vector<Teleport> teleports;

  int world_index(std::string_view name) const;
  const World& world(std::string_view name) const;

  /// Stable 64-bit digest of the script content; savestates carry it.
  std::uint64_t fingerprint() const;
};

/// Semantic problem in an otherwise well-formed script.
class ScriptError : public Error {
 public:
  ScriptError(const std::string& what, int line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// Parses the text format documented in docs/script-format.md and validates it.
/// Throws `ParseError` for grammar problems and `ScriptError` for semantic ones.
WorldScript parse_script(std::string_view text);

/// Checks the invariants `parse_script` enforces. Call it on scripts built in code.
void validate(const WorldScript& script);

/// Deterministic pseudo-random patch used for keys without a palette entry.
/// Brightness rises with the palette id so scripts can make regions visually distinct.
Patch procedural_patch(const TileKey& key);

/// Patch the script assigns to `key`.
Patch patch_for(const WorldScript& script, const TileKey& key);

}  // namespace automap::synthetic
