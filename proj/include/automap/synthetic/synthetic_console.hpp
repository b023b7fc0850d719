#pragma once

#include <array>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "automap/core/types.hpp"
#include "automap/core/window.hpp"
#include "automap/synthetic/world_script.hpp"

namespace automap::synthetic {

/// Console that plays back a WorldScript.
///
/// The camera is a position in world pixels. Each frame: teleports apply, then
/// scripted scroll and autoscroll deltas, then (inside control windows that are
/// not autoscrolling) each held direction moves the camera 1 px, then scripted
/// tile changes land. Player-driven motion is clamped to the world.
///
/// The 64x60 virtual tilemap is a wrapping window onto the world that is
/// refilled as the camera moves, the way games stream columns and rows into
/// off-screen nametable memory. The framebuffer is rendered from that tilemap
/// at the hardware scroll position, with sprites composited on top.
class SyntheticConsole final : public Console {
 public:
  explicit SyntheticConsole(std::shared_ptr<const WorldScript> script);

  static std::unique_ptr<SyntheticConsole> from_text(std::string_view text);

  void advance(ButtonSet input) override;
  FrameObservation observe() const override;
  Framebuffer render() const override;
  void render_window_luma(const ScrollWindow& window, std::vector<std::uint8_t>& out) const override;
  bool window_luma_matches(const ScrollWindow& window, std::span<const std::uint8_t> expected) const override;
  FrameIndex next_frame() const override { return next_frame_; }

  SaveState save_state() const override;
  void load_state(const SaveState& state) override;
  std::unique_ptr<Console> clone() const override;

  const WorldScript& script() const { return *script_; }
  const std::shared_ptr<const PatternSheet>& patterns() const { return patterns_; }

  int camera_x() const { return cam_x_; }
  int camera_y() const { return cam_y_; }
  const World& current_world() const { return worlds_[static_cast<std::size_t>(world_)]; }
  int current_world_index() const { return world_; }

  NametableView nametables() const;
  std::vector<SpriteEntry> sprites() const;
  ScrollRegister scroll_register() const;

 private:
  void reset_worlds();
  void apply_tile_changes_through(FrameIndex last_frame);
  const NametableView& loaded_nametables() const;

  std::shared_ptr<const WorldScript> script_;
  std::shared_ptr<const PatternSheet> patterns_;
  std::uint64_t fingerprint_ = 0;
  std::vector<World> worlds_;  // current contents, including tile changes so far
  std::size_t next_tile_change_ = 0;
  FrameIndex next_frame_ = 0;
  int world_ = 0;
  int cam_x_ = 0;
  int cam_y_ = 0;
  std::uint64_t world_generation_ = 0;  // bumped whenever `worlds_` changes

  // The tilemap only depends on the world contents and the loaded region, which
  // stays put while the camera moves inside one tile. Probe futures step back
  // and forth across tile edges, so a few recent regions are kept.
  struct LoadedTilemap {
    std::uint64_t generation = 0;
    int world = -1;
    int start_x = 0;
    int start_y = 0;
    NametableView view;
  };
  mutable std::array<std::shared_ptr<const LoadedTilemap>, 4> tilemaps_;
  mutable std::size_t next_tilemap_slot_ = 0;
};

/// Key used for virtual tilemap cells that fall outside the world.
inline constexpr TileKey kVoidKey{0, 0, 0xffff, 0};

// ---------------------------------------------------------------------------
// Ground truth

struct TruthTransition {
  TransitionKind kind;
  FrameIndex frame;  // control regain for scroll, teleport frame otherwise
  int from_room;
  int to_room;
};

/// A stretch of play inside one room, between scripted transitions.
struct TruthRoom {
  int world = 0;
  FrameIndex first_frame = 0;
  FrameIndex end_frame = 0;  // exclusive
  /// Tiles at least half visible (in both axes) inside the scroll window on
  /// some frame of the room, indexed like the world grid.
  std::vector<bool> visited;
  /// Camera at `first_frame`.
  int camera_x = 0;
  int camera_y = 0;

  int visited_count() const;
};

struct TruthSpawn {
  std::string sprite_id;
  FrameIndex frame = 0;  // first frame with a visible sprite of the track
  int room = -1;         // -1 when first seen between rooms
  PixelPoint world_position;
};

struct CameraSample {
  int world = 0;
  int x = 0;
  int y = 0;
};

struct GroundTruth {
  std::vector<World> final_worlds;
  std::vector<CameraSample> camera;  // per frame
  std::vector<ControlWindow> control;
  std::vector<TruthTransition> transitions;
  std::vector<TruthRoom> rooms;
  std::vector<TruthSpawn> spawns;
};

/// Replays `inputs` on a fresh console and records what a perfect mapper
/// would report. A scroll transition is an autoscroll window that moves the
/// camera by at least half the scroll window in either axis; its room boundary
/// runs from the autoscroll start to the next control window.
GroundTruth ground_truth(std::shared_ptr<const WorldScript> script, std::span<const ButtonSet> inputs,
                         const ScrollWindow& window);

/// Whether tile (col,row) is at least half visible in both axes when the
/// screen's top-left is at world pixel (cam_x, cam_y).
bool tile_half_visible(int col, int row, int cam_x, int cam_y, const ScrollWindow& window);

}  // namespace automap::synthetic
