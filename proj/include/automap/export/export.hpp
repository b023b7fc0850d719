#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "automap/core/types.hpp"
#include "automap/merge/merge_engine.hpp"
#include "automap/tiles/tile_accumulator.hpp"

namespace automap::exporter {

/// Character written for cells that were never observed.
inline constexpr std::string_view kUnobserved = "~";
/// Characters handed out first, in order.
inline constexpr std::string_view kLegendPalette = "-X#%?o*abcdefghijklmnpqrstuvwxyz0123456789";

/// Bijection between single UTF-8 characters and tile keys, assigned in order
/// of first appearance.
class Legend {
 public:
  /// Character for `key`, assigning the next free one if needed.
  const std::string& assign(const TileKey& key);
  /// Character for `key`; throws `Error` when unassigned.
  const std::string& symbol(const TileKey& key) const;
  /// Key for a character; nullopt for unknown characters.
  std::optional<TileKey> key(std::string_view symbol) const;

  /// The n-th character handed out (palette first, then code points from U+0100).
  static std::string glyph(std::size_t n);

  std::size_t size() const { return order_.size(); }
  /// (character, key) pairs in assignment order.
  const std::vector<std::pair<std::string, TileKey>>& entries() const { return order_; }

  /// Adds every representative key of `rooms` in room order, then row-major.
  void assign_grids(std::span<const tiles::NormalizedRoom> rooms, tiles::Representative rule);
  /// Adds every key mentioned in histories and placements not seen yet.
  void assign_rest(std::span<const tiles::NormalizedRoom> rooms);

  friend bool operator==(const Legend& a, const Legend& b) { return a.order_ == b.order_; }

 private:
  std::vector<std::pair<std::string, TileKey>> order_;
  std::map<TileKey, std::size_t> by_key_;
  std::map<std::string, std::size_t, std::less<>> by_symbol_;
};

/// H lines of W characters, each line newline-terminated.
std::string export_tiles(const tiles::NormalizedRoom& room, Legend& legend,
                         tiles::Representative rule = tiles::Representative::Quarter);

/// `{"tiles": {char: {pattern, palette, bank, aux}}, "unobserved": "~"}`.
std::string legend_json(const Legend& legend);
Legend parse_legend_json(std::string_view text);

/// Grid decoded from a tile matrix; nullopt for `~`.
struct DecodedGrid {
  int width = 0;
  int height = 0;
  std::vector<std::optional<TileKey>> cells;
  friend bool operator==(const DecodedGrid&, const DecodedGrid&) = default;
};

/// Inverse of `export_tiles`. Throws `Error` on ragged lines or unknown characters.
DecodedGrid decode_tiles(std::string_view text, const Legend& legend);

/// Directed graph with one node per merged room and one edge per link.
std::string export_dot(const merge::MergedGraph& graph);

// ---------------------------------------------------------------------------
// Raster output

using Image = Framebuffer;

/// Tiles painted with their representative patches (black where unobserved),
/// object placements composited on top. Missing patterns use the placeholder
/// patch and are logged once each.
Image rasterize(const tiles::NormalizedRoom& room, const PatternSheet& patterns,
                tiles::Representative rule = tiles::Representative::Quarter);

/// Rooms left to right in rows, grouped by cluster with an outline around each
/// cluster, numbered in traversal order, and links drawn as arrows.
Image atlas(std::span<const tiles::NormalizedRoom> rooms, const rooms::RoomGraph& graph,
            std::span<const merge::Cluster> clusters, const PatternSheet& patterns,
            tiles::Representative rule = tiles::Representative::Quarter);

std::vector<std::uint8_t> encode_png(const Image& image);
Image decode_png(std::span<const std::uint8_t> bytes);
void write_png(const std::string& path, const Image& image);

/// Writes `bytes` to `path` through a temporary file and rename.
void write_file_atomic(const std::string& path, std::string_view bytes);
std::string read_file(const std::string& path);

}  // namespace automap::exporter
