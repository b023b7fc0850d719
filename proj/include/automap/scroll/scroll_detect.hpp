#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "automap/core/types.hpp"
#include "automap/core/window.hpp"

namespace automap::scroll {

/// Grayscale image with components in [0, 1].
struct LumaImage {
  int width = 0;
  int height = 0;
  std::vector<float> px;

  float at(int x, int y) const { return px[static_cast<std::size_t>(y) * width + x]; }
};

/// Grayscale image quantized with `luma8`. Registration runs on this form.
struct Luma8Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> px;

  Luma8Image() = default;
  Luma8Image(int w, int h) : width(w), height(h), px(static_cast<std::size_t>(w) * h) {}

  std::uint8_t at(int x, int y) const { return px[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t& at(int x, int y) { return px[static_cast<std::size_t>(y) * width + x]; }
  const std::uint8_t* row(int y) const { return px.data() + static_cast<std::size_t>(y) * width; }
  std::uint8_t* row(int y) { return px.data() + static_cast<std::size_t>(y) * width; }
  friend bool operator==(const Luma8Image&, const Luma8Image&) = default;
};

/// 0.299 R + 0.587 G + 0.114 B per pixel of `window`, scaled to [0, 1].
LumaImage luminance(const Framebuffer& frame, const ScrollWindow& window);

/// Quantized luma of `window`.
Luma8Image luma8(const Framebuffer& frame, const ScrollWindow& window);

enum class Method { Nametable, Consecutive };

std::string_view to_string(Method m);
Method parse_method(std::string_view text);

struct Delta {
  int dx = 0;
  int dy = 0;
  friend constexpr bool operator==(Delta, Delta) = default;
};

struct Registration {
  Delta delta;
  /// Mean absolute luma difference in [0, 1] at the chosen shift.
  double cost = 0.0;
  double confidence() const { return 1.0 - cost; }
};

/// Camera motion between two frames: the shift (dx, dy) with
/// cur(x, y) ~ prev(x + dx, y + dy) that minimizes mean absolute difference over
/// the overlap, searching [-radius, radius]^2. Ties go to the smaller |dx|+|dy|,
/// then to the shift closest to `previous`, then to the lexicographically
/// smaller (dx, dy). Throws `Error` when radius >= either image dimension.
Registration register_consecutive(const Luma8Image& prev, const Luma8Image& cur, int radius = 32,
                                  Delta previous = {});

/// Screen-space rectangle excluded from registration (e.g. a sprite).
struct Rect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;
};

struct NametablePosition {
  int x = 0;  // [0, 512)
  int y = 0;  // [0, 480)
  double cost = 0.0;
  double confidence() const { return 1.0 - cost; }
};

/// Renders the 64x60 virtual tilemap to quantized luma, honouring mirroring.
Luma8Image render_virtual_luma(const NametableView& nametables, const PatternSheet& patterns);

/// Keeps the rendered tilemap of the previous frame and repaints only the
/// cells whose keys changed. Sheets are told apart by address, so the caller
/// keeps every sheet it passes alive while the cache is in use.
class VirtualLumaCache {
 public:
  const Luma8Image& update(const NametableView& nametables, const PatternSheet& patterns);

 private:
  const PatternSheet* sheet_ = nullptr;
  NametableView keys_;
  Luma8Image luma_;
};

/// Hardware scroll position (screen top-left in the wrapping 512x480 tilemap)
/// at which the tilemap best explains `window_luma`, the luma of `window` cut
/// from the frame. Pixels inside `masked` screen rectangles are ignored. Ties go
/// to the position toroidally closest to `hint` (Chebyshev, then Manhattan
/// distance), then to the smaller (y, x).
NametablePosition register_nametable(const Luma8Image& window_luma, const NametableView& nametables,
                                     const PatternSheet& patterns, const ScrollWindow& window,
                                     ScrollRegister hint = {}, std::span<const Rect> masked = {});

/// Same search against a tilemap that is already rendered.
NametablePosition register_nametable(const Luma8Image& window_luma, const Luma8Image& virtual_luma,
                                     const ScrollWindow& window, ScrollRegister hint = {},
                                     std::span<const Rect> masked = {});

/// Rectangles covered by visible sprites.
std::vector<Rect> sprite_rects(std::span<const SpriteEntry> sprites);

/// Signed step from `prev` to `cur` on a circle of `modulus`, in (-modulus/2, modulus/2].
int unwrap_delta(int prev, int cur, int modulus);

/// Motion between two nametable positions, unwrapping moves past half the extent.
Delta nametable_delta(ScrollRegister prev, ScrollRegister cur);

struct ScrollSample {
  FrameIndex frame = 0;
  Delta delta;
  int sx = 0;  // world offset of the window since the room started
  int sy = 0;
  Method method = Method::Nametable;
  double confidence = 1.0;
};

/// Running sum of deltas, restarted at room boundaries.
class ScrollIntegrator {
 public:
  /// The next sample starts a room: its offset is (0, 0) whatever its delta.
  void reset() { restart_ = true; }

  ScrollSample push(FrameIndex frame, Delta delta, Method method, double confidence);

  int sx() const { return sx_; }
  int sy() const { return sy_; }

 private:
  bool restart_ = true;
  int sx_ = 0;
  int sy_ = 0;
};

struct ScrollEvent {
  FrameIndex frame = 0;
  Delta delta;
  Method method = Method::Nametable;
  double confidence = 1.0;
};

/// Integrates `events` in order, restarting at each frame in `room_starts`.
std::vector<ScrollSample> integrate(std::span<const ScrollEvent> events, std::span<const FrameIndex> room_starts = {});

}  // namespace automap::scroll
