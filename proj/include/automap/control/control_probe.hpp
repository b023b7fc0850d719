#pragma once

#include <array>
#include <span>
#include <vector>

#include "automap/core/types.hpp"
#include "automap/core/window.hpp"
#include "automap/movie/movie_io.hpp"

namespace automap::control {

/// Buttons tried as alternative futures: everything except Start.
inline constexpr std::array<Button, 7> kFutureButtons = {Button::A,  Button::B,    Button::Select, Button::Up,
                                                         Button::Down, Button::Left, Button::Right};

struct ControlSample {
  FrameIndex frame = 0;
  bool has_control = true;
  /// Futures whose scroll window differed from the reference.
  int differing = 0;
  /// Futures actually simulated.
  int futures = 0;
  /// False when the probe could not run; such samples count as control.
  bool known = true;
  friend bool operator==(const ControlSample&, const ControlSample&) = default;
};

/// Whether the player could have changed the scroll window over the next
/// `lookahead` frames. The core must be positioned so that its next frame is
/// `t`. It runs the movie's inputs as the reference, then one future per
/// button in `kFutureButtons` holding only that button, and is restored
/// afterwards. Futures whose savestate equals the reference's are identical
/// by determinism and are not rendered. Throws `Error` if lookahead < 1.
ControlSample probe(Console& core, const movie::InputMovie& movie, const ScrollWindow& window, int lookahead = 3);

struct LossWindow {
  FrameIndex start = 0;
  FrameIndex end = 0;  // exclusive: frame of the first sample with control again
  /// The trace ended before the loss reached the threshold.
  bool provisional = false;
  friend bool operator==(const LossWindow&, const LossWindow&) = default;
};

/// Maximal runs of samples without control lasting at least `threshold`
/// frames. A run still open at `trace_end` that is shorter than the threshold
/// is reported as provisional.
std::vector<LossWindow> loss_windows(std::span<const ControlSample> samples, int threshold, FrameIndex trace_end);

}  // namespace automap::control
