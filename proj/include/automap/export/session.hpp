#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "automap/control/control_probe.hpp"
#include "automap/core/types.hpp"
#include "automap/core/window.hpp"
#include "automap/export/export.hpp"
#include "automap/merge/merge_engine.hpp"
#include "automap/objects/object_tracker.hpp"
#include "automap/rooms/room_segmenter.hpp"
#include "automap/scroll/scroll_detect.hpp"
#include "automap/tiles/tile_accumulator.hpp"

namespace automap::exporter {

/// Every knob of a pipeline run. Stored in the session so exports can be
/// regenerated and runs reproduced.
struct RunConfig {
  std::string core = "synthetic";
  std::string script;  // path, informational
  std::string movie;   // path, informational
  ScrollWindow window;
  int frame_skip = 1;
  scroll::Method method = scroll::Method::Nametable;
  int search_radius = 32;
  bool probe = true;
  int control_lookahead = 3;
  int control_stride = 3;
  int loss_threshold = 30;
  double teleport_delta = 0.35;
  int refractory = 60;
  objects::TrackerParams tracker;
  objects::Exclusions exclusions;
  double tau = 0.9;
  tiles::Representative representative = tiles::Representative::Quarter;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Everything a run produced plus the analyst's decisions.
struct Session {
  static constexpr int kSchemaVersion = 1;

  RunConfig config;
  FrameIndex frames = 0;
  std::vector<tiles::NormalizedRoom> rooms;
  rooms::RoomGraph graph;
  std::vector<scroll::ScrollSample> scroll;
  std::vector<control::ControlSample> control;
  std::vector<control::LossWindow> loss_windows;
  std::vector<objects::ObjectTrack> tracks;
  std::vector<merge::Cluster> suggestions;
  std::vector<merge::Decision> decisions;
  /// Patterns for every key the exports draw.
  PatternSheet patterns;

  /// Suggestions with `decisions` applied. Throws `DecisionError` on a bad log.
  merge::Catalog catalog() const;
  merge::MergedGraph merged() const;
  /// Legend in export order: representative keys first, then history, placement and track keys.
  Legend legend() const;
};

std::string session_to_json(const Session& session);
/// Current clusters, merged nodes and links, and the decision log.
std::string merged_json(const Session& session);
/// Throws `Error` for malformed documents or unsupported schema versions.
Session session_from_json(std::string_view text);

/// Recomputes cluster suggestions at `tau`.
void resuggest(Session& session, double tau);

/// Files written by `write_exports`, relative to the output directory.
struct ExportLayout {
  static std::string session() { return "session.json"; }
  static std::string legend() { return "legend.json"; }
  static std::string graph() { return "graph.dot"; }
  static std::string atlas() { return "atlas.png"; }
  static std::string decisions() { return "decisions.log"; }
  static std::string room_tiles(int id) { return "rooms/room_" + std::to_string(id) + ".txt"; }
  static std::string room_image(int id) { return "rooms/room_" + std::to_string(id) + ".png"; }
};

/// Writes the session document, tile matrices with the legend, the DOT graph
/// of the merged rooms, and per-room and atlas images under `dir`.
void write_exports(const Session& session, const std::string& dir);

}  // namespace automap::exporter
