#include "automap/control/control_probe.hpp"

#include <algorithm>
#include <optional>
#include <vector>

namespace automap::control {

ControlSample probe(Console& core, const movie::InputMovie& movie, const ScrollWindow& window, int lookahead) {
  if (lookahead < 1) throw Error("control probe lookahead must be at least 1 frame");
  const FrameIndex t = core.next_frame();
  ControlSample sample;
  sample.frame = t;

  SaveState origin;
  try {
    origin = core.save_state();
  } catch (const Error&) {
    sample.known = false;
    return sample;
  }

  try {
    for (int k = 0; k < lookahead; ++k) core.advance(movie.at(t + k));
    const SaveState reference = core.save_state();
    // Probes run every few frames, so the reference buffer is kept per thread.
    thread_local std::vector<std::uint8_t> reference_luma;
    bool have_reference = false;

    for (Button b : kFutureButtons) {
      core.load_state(origin);
      const ButtonSet held{b};
      for (int k = 0; k < lookahead; ++k) core.advance(held);
      ++sample.futures;
      if (core.save_state().bytes == reference.bytes) continue;
      if (!have_reference) {
        const SaveState future = core.save_state();
        core.load_state(reference);
        core.render_window_luma(window, reference_luma);
        core.load_state(future);
        have_reference = true;
      }
      if (!core.window_luma_matches(window, reference_luma)) ++sample.differing;
    }
    core.load_state(origin);
  } catch (const Error&) {
    core.load_state(origin);
    return {t, true, 0, sample.futures, false};
  }
  sample.has_control = sample.differing > 0;
  return sample;
}

std::vector<LossWindow> loss_windows(std::span<const ControlSample> samples, int threshold, FrameIndex trace_end) {
  std::vector<LossWindow> out;
  std::optional<FrameIndex> run_start;
  for (const auto& s : samples) {
    const bool lost = s.known && !s.has_control;
    if (lost && !run_start) run_start = s.frame;
    if (!lost && run_start) {
      if (s.frame - *run_start >= threshold) out.push_back({*run_start, s.frame, false});
      run_start.reset();
    }
  }
  if (run_start) {
    const FrameIndex end = std::max(trace_end, *run_start);
    out.push_back({*run_start, end, end - *run_start < threshold});
  }
  return out;
}

}  // namespace automap::control
