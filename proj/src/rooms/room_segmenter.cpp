#include "automap/rooms/room_segmenter.hpp"

#include <cstdlib>

namespace automap::rooms {

RoomSegmenter::RoomSegmenter(SegmenterParams params, FrameIndex first_frame) : params_(params) {
  rooms_.push_back({0, first_frame, first_frame});
}

int RoomSegmenter::open_room(FrameIndex t) {
  const int id = static_cast<int>(rooms_.size());
  rooms_.push_back({id, t, t});
  return id;
}

void RoomSegmenter::on_control(const control::ControlSample& sample) {
  const bool lost = sample.known && !sample.has_control;
  if (lost && !in_loss_) {
    in_loss_ = true;
    loss_start_ = sample.frame;
    regained_.reset();
  } else if (!lost && in_loss_) {
    in_loss_ = false;
    regained_ = sample.frame;
  }
}

SegmentStep RoomSegmenter::on_frame(FrameIndex t, scroll::Delta delta, double difference) {
  SegmentStep step;
  const bool refractory = last_teleport_ && t - *last_teleport_ < params_.refractory;
  if (difference >= params_.teleport_delta && !refractory) {
    if (holding_) step.held = SegmentStep::Held::Keep;
    const int from = current_room();
    rooms_.back().end_frame = t;
    const int to = open_room(t);
    step.transition = Transition{TransitionKind::Teleport, from, to, t, 0, 0, difference};
    links_.push_back(*step.transition);
    last_teleport_ = t;
    holding_ = in_loss_;
    held_dx_ = held_dy_ = 0;
    held_loss_start_ = loss_start_;
    step.hold_current = holding_;
    if (!holding_) rooms_.back().end_frame = t + 1;
    return step;
  }

  if (in_loss_) {
    if (!holding_) {
      holding_ = true;
      held_dx_ = held_dy_ = 0;
      held_loss_start_ = loss_start_;
    }
    held_dx_ += delta.dx;
    held_dy_ += delta.dy;
    step.hold_current = true;
    return step;
  }

  if (holding_) {
    const FrameIndex regain = regained_.value_or(t);
    holding_ = false;
    // The probe that saw control return ran before this frame advanced, so
    // this frame's motion may still be the tail of the scripted scroll.
    held_dx_ += delta.dx;
    held_dy_ += delta.dy;
    const bool long_enough = regain - held_loss_start_ >= params_.loss_threshold;
    const bool scrolled = std::abs(held_dx_) * 2 >= params_.window.w || std::abs(held_dy_) * 2 >= params_.window.h;
    if (long_enough && scrolled) {
      step.held = SegmentStep::Held::Discard;
      const int from = current_room();
      if (rooms_.back().end_frame > held_loss_start_) rooms_.back().end_frame = held_loss_start_;
      const int to = open_room(t);
      step.transition = Transition{TransitionKind::Scroll, from, to, regain, held_dx_, held_dy_, 0.0};
      links_.push_back(*step.transition);
    } else {
      step.held = SegmentStep::Held::Keep;
    }
  }
  rooms_.back().end_frame = t + 1;
  return step;
}

RoomGraph RoomSegmenter::finalize(FrameIndex trace_end) {
  if (holding_ || rooms_.back().end_frame < trace_end) rooms_.back().end_frame = trace_end;
  holding_ = false;
  return {rooms_, links_};
}

}  // namespace automap::rooms
