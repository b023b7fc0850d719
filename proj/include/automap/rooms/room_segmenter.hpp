#pragma once

#include <optional>
#include <vector>

#include "automap/control/control_probe.hpp"
#include "automap/core/types.hpp"
#include "automap/core/window.hpp"
#include "automap/scroll/scroll_detect.hpp"

namespace automap::rooms {

/// A link between two rooms, in the order the player took it.
struct Transition {
  TransitionKind kind = TransitionKind::Scroll;
  int from_room = 0;
  int to_room = 0;
  /// Control regain for scroll links, the detecting frame for teleports.
  FrameIndex frame = 0;
  /// Scroll accumulated while control was lost (scroll links).
  int dx = 0;
  int dy = 0;
  /// Window difference that triggered the link (teleports).
  double score = 0.0;
  friend bool operator==(const Transition&, const Transition&) = default;
};

struct RoomSpan {
  int id = 0;
  FrameIndex first_frame = 0;
  FrameIndex end_frame = 0;  // exclusive
  friend bool operator==(const RoomSpan&, const RoomSpan&) = default;
};

/// Rooms numbered in first-entry order and the links between them.
struct RoomGraph {
  std::vector<RoomSpan> rooms;
  std::vector<Transition> links;
  friend bool operator==(const RoomGraph&, const RoomGraph&) = default;
};

struct SegmenterParams {
  ScrollWindow window;
  /// Minimum control loss, in frames, that can carry a scroll transition.
  int loss_threshold = 30;
  /// Mean absolute window luma difference (0..1) that signals a teleport.
  double teleport_delta = 0.35;
  /// Frames after a teleport during which no further teleport fires.
  int refractory = 60;
};

/// What happens to observed frames as a result of one update.
struct SegmentStep {
  enum class Held {
    None,     // nothing was held
    Keep,     // held frames belong to the room that was open when they were seen
    Discard,  // held frames were mid-transition and belong to no room
  };
  Held held = Held::None;
  /// The current frame is held back until the control loss resolves.
  bool hold_current = false;
  /// A link fired; the current frame (unless held) opens `transition->to_room`.
  std::optional<Transition> transition;
};

/// Decides room boundaries from scroll deltas, control samples, and frame
/// differences.
///
/// While the latest control sample says the player has no control, observed
/// frames are held. When control returns after a loss of at least
/// `loss_threshold` frames during which the window scrolled by at least half
/// its width or height, the held frames are discarded and a scroll link opens
/// a new room. Otherwise they are kept. A window difference of at least
/// `teleport_delta` opens a new room immediately.
class RoomSegmenter {
 public:
  explicit RoomSegmenter(SegmenterParams params, FrameIndex first_frame = 0);

  void on_control(const control::ControlSample& sample);
  SegmentStep on_frame(FrameIndex t, scroll::Delta delta, double difference);

  /// Ends the trace: held frames stay in the open room.
  RoomGraph finalize(FrameIndex trace_end);

  int current_room() const { return static_cast<int>(rooms_.size()) - 1; }
  bool holding() const { return holding_; }
  const SegmenterParams& params() const { return params_; }

 private:
  int open_room(FrameIndex t);

  SegmenterParams params_;
  std::vector<RoomSpan> rooms_;
  std::vector<Transition> links_;

  bool in_loss_ = false;
  FrameIndex loss_start_ = 0;
  std::optional<FrameIndex> regained_;

  bool holding_ = false;
  int held_dx_ = 0;
  int held_dy_ = 0;
  FrameIndex held_loss_start_ = 0;
  std::optional<FrameIndex> last_teleport_;
};

}  // namespace automap::rooms
