#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "automap/core/types.hpp"
#include "automap/tiles/tile_accumulator.hpp"

namespace automap::objects {

using tiles::LayoutCell;

/// Sprites that touch or overlap (within 1 px) and so belong to one object.
struct Blob {
  int x = 0;  // anchor: minimum member x
  int y = 0;  // anchor: minimum member y
  int width = 0;
  int height = 0;
  FrameIndex frame = 0;
  std::vector<SpriteEntry> members;
  /// Members relative to the anchor, sorted.
  std::vector<LayoutCell> layout;
};

/// Connected components of visible sprites under 8-adjacency, ordered by
/// anchor (y, then x).
std::vector<Blob> group(std::span<const SpriteEntry> sprites, FrameIndex frame = 0);

/// Jaccard index of the (offset, key) sets of two layouts.
double layout_similarity(std::span<const LayoutCell> a, std::span<const LayoutCell> b);

struct MatchParams {
  double max_dist = 16.0;
  double alpha = 0.5;
  double beta = 0.5;
  friend bool operator==(const MatchParams&, const MatchParams&) = default;
};

/// Last known state of a live track, as seen by the matcher.
struct TrackHead {
  int x = 0;
  int y = 0;
  std::vector<LayoutCell> layout;
};

/// alpha * (1 - dist / max_dist) + beta * layout similarity, or a negative
/// value when the anchors are more than max_dist apart.
double match_weight(const TrackHead& track, const Blob& blob, const MatchParams& params);

/// Maximum-weight assignment of blobs to tracks. Element i is the track index
/// given to blob i, or -1 when the blob starts a new track. Pairs beyond
/// max_dist are never assigned, nor are pairs of zero weight.
std::vector<int> match(std::span<const TrackHead> tracks, std::span<const Blob> blobs, const MatchParams& params);

/// Assignment minimizing total cost on a rectangular matrix (rows <= cols).
/// Returns the column chosen for each row.
std::vector<int> hungarian(const std::vector<std::vector<double>>& cost);

struct TrackFrame {
  FrameIndex frame = 0;
  int x = 0;
  int y = 0;
  std::vector<LayoutCell> layout;
};

struct ObjectTrack {
  int id = 0;
  /// Room the object was first seen in; -1 when it has none.
  int room = -1;
  std::vector<TrackFrame> frames;
  bool excluded = false;

  FrameIndex first_seen() const { return frames.front().frame; }
  FrameIndex last_seen() const { return frames.back().frame; }
};

struct TrackerParams {
  MatchParams match;
  /// Frames a track may go unmatched before it closes.
  int coast = 8;
  friend bool operator==(const TrackerParams&, const TrackerParams&) = default;
};

/// Frame-ordered tracker. Blob coordinates are room pixels, so identities only
/// persist within a room.
class Tracker {
 public:
  explicit Tracker(TrackerParams params = {}) : params_(params) {}

  void update(FrameIndex t, int room, std::span<const Blob> blobs);
  /// Closes every live track (the room they were in has ended).
  void end_room();
  const std::vector<ObjectTrack>& tracks() const { return tracks_; }
  std::vector<ObjectTrack> take() { return std::move(tracks_); }

 private:
  TrackerParams params_;
  std::vector<ObjectTrack> tracks_;
  std::vector<std::size_t> live_;
};

/// Sorted key multisets of unwanted objects.
struct Exclusions {
  std::vector<std::vector<TileKey>> signatures;

  bool matches(std::span<const LayoutCell> layout) const;
  friend bool operator==(const Exclusions&, const Exclusions&) = default;
};

/// Lines `exclude p:pal:bank[,p:pal:bank...]`; `#` comments and blank lines ignored.
Exclusions parse_exclusions(std::string_view text);

/// Marks tracks whose layout on any frame matches a signature.
void apply_exclusions(std::span<ObjectTrack> tracks, const Exclusions& exclusions);

/// Writes the first-witnessed position of every non-excluded track into the
/// room it was first seen in (matched by room id), converting to grid pixels.
void place(std::span<const ObjectTrack> tracks, std::span<tiles::NormalizedRoom> rooms);

}  // namespace automap::objects
