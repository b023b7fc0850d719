#include "automap/pipeline/pipeline.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <cstdlib>
#include <optional>
#include <set>

#include "automap/control/control_probe.hpp"
#include "automap/kernels/kernels.hpp"
#include "automap/merge/merge_engine.hpp"
#include "automap/objects/object_tracker.hpp"
#include "automap/rooms/room_segmenter.hpp"
#include "automap/scroll/scroll_detect.hpp"
#include "automap/tiles/tile_accumulator.hpp"

namespace automap::pipeline {

namespace {

using scroll::Delta;
using scroll::Luma8Image;

/// Mean absolute luma difference (0..1) between consecutive windows after
/// undoing the detected motion; falls back to the unshifted difference when
/// the motion leaves less than half the window overlapping.
double window_difference(const Luma8Image& prev, const Luma8Image& cur, Delta d) {
  const int w = cur.width, h = cur.height;
  int x0 = std::max(0, -d.dx), x1 = std::min(w, w - d.dx);
  int y0 = std::max(0, -d.dy), y1 = std::min(h, h - d.dy);
  if (x1 <= x0 || y1 <= y0 || 2L * (x1 - x0) * (y1 - y0) < static_cast<long>(w) * h) {
    d = {};
    x0 = y0 = 0;
    x1 = w;
    y1 = h;
  }
  const auto sad = kernels::active().sad_u8;
  std::uint64_t total = 0;
  for (int y = y0; y < y1; ++y) {
    total += sad(cur.row(y) + x0, prev.row(y + d.dy) + x0 + d.dx, static_cast<std::size_t>(x1 - x0));
  }
  const double count = static_cast<double>(x1 - x0) * (y1 - y0);
  return static_cast<double>(total) / count / 255.0;
}

ScrollRegister advance_position(ScrollRegister p, Delta d) {
  return {((p.x + d.dx) % kVirtualWidthPx + kVirtualWidthPx) % kVirtualWidthPx,
          ((p.y + d.dy) % kVirtualHeightPx + kVirtualHeightPx) % kVirtualHeightPx};
}

/// One observed frame on its way into a room.
struct FrameRecord {
  FrameIndex t = 0;
  FrameIndex end = 0;
  NametableView nametables;
  ScrollRegister position;
  int sx = 0;
  int sy = 0;
  std::vector<objects::Blob> blobs;  // screen coordinates
};

std::vector<objects::Blob> blobs_in_window(const std::vector<SpriteEntry>& sprites, FrameIndex t,
                                           const ScrollWindow& w) {
  auto blobs = objects::group(sprites, t);
  std::erase_if(blobs, [&](const objects::Blob& b) {
    return std::none_of(b.members.begin(), b.members.end(), [&](const SpriteEntry& s) {
      return s.x >= w.x && s.y >= w.y && s.x < w.x + w.w && s.y < w.y + w.h;
    });
  });
  return blobs;
}

class Runner {
 public:
  Runner(Console& core, const movie::InputMovie& movie, const RunConfig& config)
      : core_(core),
        movie_(movie),
        config_(config),
        segmenter_({config.window, config.loss_threshold, config.teleport_delta, config.refractory}),
        tracker_(config.tracker) {
    if (config.frame_skip < 1) throw Error("frame skip must be at least 1");
    if (config.control_stride < 1) throw Error("control stride must be at least 1");
    if (!config.window.valid()) throw Error("scroll window " + to_string(config.window) + " is not inside the screen");
    accumulators_.emplace_back(0);
  }

  Session run(RunStats* stats) {
    const auto started = std::chrono::steady_clock::now();
    const FrameIndex first = core_.next_frame();
    const auto trace_end = static_cast<FrameIndex>(movie_.frames.size());
    for (FrameIndex t = first; t < trace_end; ++t) step(t, trace_end);

    finalize(trace_end);
    if (stats) {
      stats->frames = trace_end - first;
      stats->observed = observed_;
      stats->probes = static_cast<FrameIndex>(session_.control.size());
      stats->seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    }
    return std::move(session_);
  }

 private:
  void step(FrameIndex t, FrameIndex trace_end) {
    if (config_.probe && t % config_.control_stride == 0) {
      control::ControlSample sample;
      try {
        sample = control::probe(core_, movie_, config_.window, config_.control_lookahead);
      } catch (const Error& e) {
        throw PipelineError(t, "control-probe", e.what());
      }
      session_.control.push_back(sample);
      segmenter_.on_control(sample);
    }
    try {
      core_.advance(movie_.at(t));
    } catch (const Error& e) {
      throw PipelineError(t, "console", e.what());
    }
    if (t % config_.frame_skip != 0) return;
    ++observed_;

    FrameObservation obs = core_.observe();
    if (obs.patterns && seen_sheets_.insert(obs.patterns.get()).second) sheets_.push_back(obs.patterns);

    Luma8Image luma;
    Delta delta;
    ScrollRegister position;
    double confidence = 1.0;
    try {
      luma = scroll::luma8(obs.framebuffer, config_.window);
      const auto masks = scroll::sprite_rects(obs.sprites);
      auto anchor = [&](ScrollRegister hint) {
        return scroll::register_nametable(luma, virtual_luma_.update(obs.nametables, *obs.patterns), config_.window, hint,
                                          masks);
      };
      if (!prev_luma_) {
        const auto r = anchor({});
        position = {r.x, r.y};
        confidence = r.confidence();
      } else if (config_.method == scroll::Method::Nametable) {
        const auto r = anchor(prev_position_);
        position = {r.x, r.y};
        delta = scroll::nametable_delta(prev_position_, position);
        confidence = r.confidence();
      } else {
        const auto r = scroll::register_consecutive(*prev_luma_, luma, config_.search_radius, prev_delta_);
        delta = r.delta;
        position = advance_position(prev_position_, delta);
        confidence = r.confidence();
      }
    } catch (const Error& e) {
      throw PipelineError(t, "scroll-detect", e.what());
    }

    const double diff = prev_luma_ ? window_difference(*prev_luma_, luma, delta) : 0.0;
    const rooms::SegmentStep seg = segmenter_.on_frame(t, delta, diff);

    if (seg.held == rooms::SegmentStep::Held::Keep) flush_pending();
    if (seg.held == rooms::SegmentStep::Held::Discard) pending_.clear();
    if (seg.transition) {
      spdlog::debug("frame {}: {} link {} -> {}", t, to_string(seg.transition->kind), seg.transition->from_room,
                    seg.transition->to_room);
      accumulators_.emplace_back(seg.transition->to_room);
      tracker_.end_room();
      integrator_.reset();
      if (config_.method == scroll::Method::Consecutive) {
        // Consecutive registration only knows motion; re-anchor in the tilemap.
        const auto r = scroll::register_nametable(luma, virtual_luma_.update(obs.nametables, *obs.patterns),
                                                  config_.window, position, scroll::sprite_rects(obs.sprites));
        position = {r.x, r.y};
      }
    }
    const auto sample = integrator_.push(t, delta, config_.method, confidence);
    session_.scroll.push_back(sample);

    FrameRecord rec{t,
                    std::min(t + config_.frame_skip, trace_end),
                    std::move(obs.nametables),
                    position,
                    sample.sx,
                    sample.sy,
                    blobs_in_window(obs.sprites, t, config_.window)};
    if (seg.hold_current) {
      pending_.push_back(std::move(rec));
    } else {
      commit(rec);
    }

    prev_luma_ = std::move(luma);
    prev_position_ = position;
    prev_delta_ = delta;
  }

  void commit(FrameRecord& rec) {
    auto& acc = accumulators_.back();
    try {
      acc.observe(rec.nametables, rec.position, config_.window, rec.sx, rec.sy, rec.t, rec.end);
    } catch (const Error& e) {
      throw PipelineError(rec.t, "tile-accumulator", e.what());
    }
    for (auto& b : rec.blobs) {
      b.x = acc.room_px_x(b.x - config_.window.x, rec.sx);
      b.y = acc.room_px_y(b.y - config_.window.y, rec.sy);
    }
    tracker_.update(rec.t, acc.id(), rec.blobs);
  }

  void flush_pending() {
    for (auto& rec : pending_) commit(rec);
    pending_.clear();
  }

  void finalize(FrameIndex trace_end) {
    flush_pending();
    rooms::RoomGraph graph = segmenter_.finalize(trace_end);

    // Rooms that never received a frame are spliced out of the link chain.
    std::vector<int> new_id(accumulators_.size(), -1);
    int next = 0;
    for (std::size_t i = 0; i < accumulators_.size(); ++i) {
      if (!accumulators_[i].empty()) new_id[i] = next++;
    }
    std::vector<rooms::Transition> links;
    std::optional<rooms::Transition> dangling;
    for (const auto& l : graph.links) {
      rooms::Transition link = l;
      if (dangling) {
        link.from_room = dangling->from_room;
        dangling.reset();
      }
      if (new_id[static_cast<std::size_t>(link.to_room)] < 0) {
        dangling = link;
        continue;
      }
      links.push_back(link);
    }
    for (auto& l : links) {
      l.from_room = new_id[static_cast<std::size_t>(l.from_room)];
      l.to_room = new_id[static_cast<std::size_t>(l.to_room)];
    }
    std::erase_if(links, [](const auto& l) { return l.from_room < 0; });

    session_.config = config_;
    session_.frames = trace_end;
    session_.graph.links = std::move(links);
    for (std::size_t i = 0; i < accumulators_.size(); ++i) {
      if (new_id[i] < 0) continue;
      tiles::NormalizedRoom room = accumulators_[i].close();
      room.id = new_id[i];
      session_.graph.rooms.push_back({room.id, room.first_frame, room.end_frame});
      session_.rooms.push_back(std::move(room));
    }

    session_.tracks = tracker_.take();
    for (auto& tr : session_.tracks) {
      if (tr.room >= 0) tr.room = new_id[static_cast<std::size_t>(tr.room)];
    }
    objects::apply_exclusions(session_.tracks, config_.exclusions);
    objects::place(session_.tracks, session_.rooms);

    session_.loss_windows = control::loss_windows(session_.control, config_.loss_threshold, trace_end);
    exporter::resuggest(session_, config_.tau);

    const exporter::Legend legend = session_.legend();
    for (const auto& [ch, key] : legend.entries()) {
      for (const auto& sheet : sheets_) {
        if (const Patch* p = sheet->find(key)) {
          session_.patterns.set(key, *p);
          break;
        }
      }
    }
  }

  Console& core_;
  const movie::InputMovie& movie_;
  RunConfig config_;
  rooms::RoomSegmenter segmenter_;
  scroll::VirtualLumaCache virtual_luma_;
  objects::Tracker tracker_;
  scroll::ScrollIntegrator integrator_;
  std::vector<tiles::RoomAccumulator> accumulators_;
  std::vector<FrameRecord> pending_;

  std::optional<Luma8Image> prev_luma_;
  ScrollRegister prev_position_;
  Delta prev_delta_;
  FrameIndex observed_ = 0;

  std::set<const PatternSheet*> seen_sheets_;
  std::vector<std::shared_ptr<const PatternSheet>> sheets_;
  Session session_;
};

}  // namespace

Session run(Console& core, const movie::InputMovie& movie, const RunConfig& config, RunStats* stats) {
  Runner runner(core, movie, config);
  return runner.run(stats);
}

}  // namespace automap::pipeline
