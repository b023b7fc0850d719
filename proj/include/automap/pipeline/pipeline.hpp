#pragma once

#include <string>

#include "automap/core/types.hpp"
#include "automap/export/session.hpp"
#include "automap/movie/movie_io.hpp"

namespace automap::pipeline {

using exporter::RunConfig;
using exporter::Session;

/// Failure inside a pipeline stage, tagged with where it happened.
class PipelineError : public Error {
 public:
  PipelineError(FrameIndex frame, std::string stage, const std::string& what)
      : Error("frame " + std::to_string(frame) + ", " + stage + ": " + what), frame_(frame), stage_(std::move(stage)) {}
  FrameIndex frame() const { return frame_; }
  const std::string& stage() const { return stage_; }

 private:
  FrameIndex frame_;
  std::string stage_;
};

struct RunStats {
  FrameIndex frames = 0;
  FrameIndex observed = 0;
  FrameIndex probes = 0;
  double seconds = 0.0;
};

/// Plays `movie` on `core` from its current state and maps what it sees.
///
/// Every frame is emulated. On every `control_stride`-th frame the control
/// probe runs before the frame is stepped. On every `frame_skip`-th frame the
/// observation goes through scroll detection, the room segmenter, the tile
/// accumulator and the object tracker. At the end rooms are normalized,
/// objects placed and merge clusters suggested.
Session run(Console& core, const movie::InputMovie& movie, const RunConfig& config, RunStats* stats = nullptr);

}  // namespace automap::pipeline
