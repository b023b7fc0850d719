#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "automap/core/types.hpp"
#include "automap/rooms/room_segmenter.hpp"
#include "automap/tiles/tile_accumulator.hpp"

namespace automap::merge {

/// A room reduced to what similarity looks at.
struct RoomGrid {
  int width = 0;
  int height = 0;
  std::vector<std::optional<TileKey>> cells;  // nullopt = unobserved

  static RoomGrid from(const tiles::NormalizedRoom& room, tiles::Representative rule = tiles::Representative::Quarter);
};

/// Fraction of cells, over the union of both extents anchored at the origin,
/// whose representative keys agree. Cells outside one room never agree.
double similarity(const RoomGrid& a, const RoomGrid& b);
double similarity(const tiles::NormalizedRoom& a, const tiles::NormalizedRoom& b);

struct Cluster {
  int id = 0;  // printed as C<id>
  std::vector<int> members;  // ascending
  /// similarity[i][j] between members[i] and members[j] at suggestion time.
  std::vector<std::vector<double>> similarity;
  bool suggested = true;

  std::string name() const { return "C" + std::to_string(id); }
  friend bool operator==(const Cluster&, const Cluster&) = default;
};

/// Single-linkage clusters at threshold `tau`, numbered C0, C1, ... in order
/// of their lowest member. Every room lands in exactly one cluster.
std::vector<Cluster> suggest(std::span<const RoomGrid> rooms, double tau = 0.9);

/// Same, from a precomputed symmetric similarity matrix.
std::vector<Cluster> suggest_from_matrix(const std::vector<std::vector<double>>& sim, double tau = 0.9);

std::vector<std::vector<double>> similarity_matrix(std::span<const RoomGrid> rooms);

// ---------------------------------------------------------------------------
// Decisions

struct Decision {
  enum class Kind { Merge, Split, Confirm };
  Kind kind = Kind::Merge;
  std::vector<int> rooms;  // merge, split
  int cluster = -1;        // split, confirm
  std::string author;
  std::string timestamp;

  friend bool operator==(const Decision&, const Decision&) = default;
};

/// `merge 7 9`, `split C2 5`, `confirm C0`, with an optional trailing
/// `# author=NAME TIMESTAMP` comment.
Decision parse_decision(std::string_view line);
/// The log form of `d`, without a trailing newline.
std::string format_decision(const Decision& d, bool with_attribution = true);

/// Parses a whole log; blank and comment-only lines are skipped. Errors carry
/// the 1-based line number.
std::vector<Decision> parse_decision_log(std::string_view text);
std::string format_decision_log(std::span<const Decision> log);

/// A decision that cannot be applied to the current catalog.
class DecisionError : public Error {
 public:
  DecisionError(const std::string& entry, const std::string& why)
      : Error("rejected '" + entry + "': " + why), entry_(entry) {}
  const std::string& entry() const { return entry_; }

 private:
  std::string entry_;
};

/// Suggested clusters plus the analyst's merges. Applying decisions one at a
/// time or as a single list gives the same state.
class Catalog {
 public:
  Catalog() = default;
  Catalog(int room_count, std::vector<Cluster> suggestions);

  /// Throws `DecisionError` and leaves the catalog untouched when `d` conflicts.
  void apply(const Decision& d);
  void apply(std::span<const Decision> log);

  int room_count() const { return room_count_; }
  const std::vector<Cluster>& clusters() const { return clusters_; }
  const Cluster* cluster(int id) const;
  const std::vector<Decision>& log() const { return log_; }

  /// Rooms collapsed together, each group ascending, groups ordered by lowest member.
  std::vector<std::vector<int>> groups() const;
  /// Lowest room id merged with `room`.
  int representative(int room) const;

  friend bool operator==(const Catalog&, const Catalog&) = default;

 private:
  void merge_rooms(const std::vector<int>& rooms);
  void normalize();

  int room_count_ = 0;
  std::vector<int> group_of_;  // room -> representative (lowest member)
  std::vector<Cluster> clusters_;
  int next_cluster_ = 0;
  std::vector<Decision> log_;
};

struct MergedNode {
  int id = 0;  // representative room
  std::vector<int> members;
  int width = 0;
  int height = 0;
  friend bool operator==(const MergedNode&, const MergedNode&) = default;
};

/// The room graph after merges: one node per group, links re-pointed to
/// representatives (self-links kept, none dropped).
struct MergedGraph {
  std::vector<MergedNode> nodes;
  std::vector<rooms::Transition> links;
  friend bool operator==(const MergedGraph&, const MergedGraph&) = default;
};

/// `rooms` supplies node dimensions (the representative's) and may be empty.
MergedGraph merged_graph(const rooms::RoomGraph& graph, const Catalog& catalog,
                         std::span<const tiles::NormalizedRoom> rooms = {});

}  // namespace automap::merge
