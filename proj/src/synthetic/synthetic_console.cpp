#include "automap/synthetic/synthetic_console.hpp"

#include <algorithm>
#include <cstring>

namespace automap::synthetic {

namespace {

constexpr std::uint32_t kStateMagic = 0x53534d41;  // "AMSS"
constexpr std::uint32_t kStateVersion = 1;

int floor_div(int a, int b) { return (a >= 0) ? a / b : -((-a + b - 1) / b); }
int wrap(int a, int m) { return ((a % m) + m) % m; }

// Distinct rows/columns the physical nametables hold along one axis.
int physical_extent(Mirroring m, bool horizontal_axis) {
  switch (m) {
    case Mirroring::FourScreen: return horizontal_axis ? kVirtualCols : kVirtualRows;
    case Mirroring::Vertical: return horizontal_axis ? kVirtualCols : kNametableRows;
    case Mirroring::Horizontal: return horizontal_axis ? kNametableCols : kVirtualRows;
    case Mirroring::SingleScreen: return horizontal_axis ? kNametableCols : kNametableRows;
  }
  return kVirtualCols;
}

// First world tile of the slice the game keeps loaded along one axis. The
// slice is `extent` tiles long and centred on the visible tiles when it is
// larger than the screen; otherwise it starts at the first visible tile and the
// far partial tile shows stale data, as on hardware.
int loaded_start(int camera_px, int extent, int view_px) {
  const int needed = view_px / kTilePx + 1;
  const int margin = extent > needed ? (extent - needed) / 2 : 0;
  return floor_div(camera_px, kTilePx) - margin;
}

template <typename T>
void put(std::vector<std::uint8_t>& out, T v) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  out.insert(out.end(), p, p + sizeof v);
}

template <typename T>
T get(const std::vector<std::uint8_t>& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw Error("savestate is truncated");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof v);
  pos += sizeof v;
  return v;
}

std::shared_ptr<const PatternSheet> build_patterns(const WorldScript& s) {
  auto sheet = std::make_shared<PatternSheet>();
  auto add = [&](const TileKey& k) {
    if (!sheet->find(k)) sheet->set(k, patch_for(s, k));
  };
  for (const auto& w : s.worlds) {
    for (const auto& k : w.tiles) add(k);
  }
  for (const auto& tc : s.tile_changes) add(tc.key);
  for (const auto& sp : s.sprites) {
    for (const auto& row : sp.tiles) {
      for (const auto& k : row) add(k);
    }
  }
  for (const auto& [k, p] : s.palette) sheet->set(k, p);
  add(kVoidKey);
  return sheet;
}

}  // namespace

SyntheticConsole::SyntheticConsole(std::shared_ptr<const WorldScript> script) : script_(std::move(script)) {
  validate(*script_);
  patterns_ = build_patterns(*script_);
  fingerprint_ = script_->fingerprint();
  reset_worlds();
  world_ = script_->world_index(script_->start_world);
  cam_x_ = script_->start_x;
  cam_y_ = script_->start_y;
}

std::unique_ptr<SyntheticConsole> SyntheticConsole::from_text(std::string_view text) {
  return std::make_unique<SyntheticConsole>(std::make_shared<const WorldScript>(parse_script(text)));
}

void SyntheticConsole::reset_worlds() {
  worlds_ = script_->worlds;
  next_tile_change_ = 0;
  ++world_generation_;
}

void SyntheticConsole::apply_tile_changes_through(FrameIndex last_frame) {
  const auto& changes = script_->tile_changes;
  while (next_tile_change_ < changes.size() && changes[next_tile_change_].frame <= last_frame) {
    const auto& tc = changes[next_tile_change_++];
    worlds_[static_cast<std::size_t>(script_->world_index(tc.world))].at(tc.x, tc.y) = tc.key;
    ++world_generation_;
  }
}

void SyntheticConsole::advance(ButtonSet input) {
  const FrameIndex t = next_frame_;
  const auto& s = *script_;

  for (const auto& tp : s.teleports) {
    if (tp.frame == t) {
      world_ = s.world_index(tp.world);
      cam_x_ = tp.x;
      cam_y_ = tp.y;
    }
  }

  int dx = 0, dy = 0;
  for (const auto& e : s.scrolls) {
    if (e.frames.contains(t)) dx += e.dx, dy += e.dy;
  }
  bool autoscrolling = false;
  for (const auto& e : s.autoscrolls) {
    if (e.frames.contains(t)) dx += e.dx, dy += e.dy, autoscrolling = true;
  }
  if (!autoscrolling) {
    const bool control = std::any_of(s.controls.begin(), s.controls.end(),
                                     [t](const ControlWindow& c) { return c.frames.contains(t); });
    if (control) {
      if (input.test(Button::Right)) ++dx;
      if (input.test(Button::Left)) --dx;
      if (input.test(Button::Down)) ++dy;
      if (input.test(Button::Up)) --dy;
    }
  }
  const World& w = current_world();
  cam_x_ = std::clamp(cam_x_ + dx, 0, w.width * kTilePx - kScreenWidth);
  cam_y_ = std::clamp(cam_y_ + dy, 0, w.height * kTilePx - kScreenHeight);

  apply_tile_changes_through(t);
  ++next_frame_;
}

ScrollRegister SyntheticConsole::scroll_register() const {
  return {wrap(cam_x_, kVirtualWidthPx), wrap(cam_y_, kVirtualHeightPx)};
}

NametableView SyntheticConsole::nametables() const { return loaded_nametables(); }

const NametableView& SyntheticConsole::loaded_nametables() const {
  const Mirroring m = script_->mirroring;
  const int ext_x = physical_extent(m, true);
  const int ext_y = physical_extent(m, false);
  const int start_x = loaded_start(cam_x_, ext_x, kScreenWidth);
  const int start_y = loaded_start(cam_y_, ext_y, kScreenHeight);
  for (const auto& cached : tilemaps_) {
    if (cached && cached->generation == world_generation_ && cached->world == world_ && cached->start_x == start_x &&
        cached->start_y == start_y) {
      return cached->view;
    }
  }
  // Clones share the cached tilemap until one of them needs a different one.
  auto fresh = std::make_shared<LoadedTilemap>(LoadedTilemap{world_generation_, world_, start_x, start_y, NametableView(m)});
  NametableView& view = fresh->view;
  const World& w = current_world();
  for (int py = 0; py < ext_y; ++py) {
    const int wy = start_y + wrap(py - start_y, ext_y);
    for (int px = 0; px < ext_x; ++px) {
      const int wx = start_x + wrap(px - start_x, ext_x);
      const bool inside = wx >= 0 && wy >= 0 && wx < w.width && wy < w.height;
      view.set_cell(px, py, inside ? w.at(wx, wy) : kVoidKey);
    }
  }
  auto& slot = tilemaps_[next_tilemap_slot_];
  next_tilemap_slot_ = (next_tilemap_slot_ + 1) % tilemaps_.size();
  slot = std::move(fresh);
  return slot->view;
}

std::vector<SpriteEntry> SyntheticConsole::sprites() const {
  std::vector<SpriteEntry> out;
  const FrameIndex t = next_frame_ - 1;
  const World& w = current_world();
  for (const auto& track : script_->sprites) {
    if (!track.frames.contains(t)) continue;
    if (track.world && *track.world != w.name) continue;
    const PixelPoint p = track.position_at(t);
    for (std::size_t r = 0; r < track.tiles.size(); ++r) {
      for (std::size_t c = 0; c < track.tiles[r].size(); ++c) {
        if (out.size() == kMaxSprites) return out;
        SpriteEntry e;
        e.x = p.x + static_cast<int>(c) * kTilePx - cam_x_;
        e.y = p.y + static_cast<int>(r) * kTilePx - cam_y_;
        e.tile = track.tiles[r][c];
        e.visible = e.x >= 0 && e.y >= 0 && e.x < kScreenWidth && e.y < kScreenHeight;
        out.push_back(e);
      }
    }
  }
  return out;
}

namespace {

void draw_background(Framebuffer& fb, const NametableView& nt, const PatternSheet& sheet, ScrollRegister scroll) {
  // Walk tile by tile so each visible cell costs one pattern lookup.
  const int phase_x = scroll.x % kTilePx, phase_y = scroll.y % kTilePx;
  for (int ty = -phase_y; ty < fb.height(); ty += kTilePx) {
    const int row = ((scroll.y + ty) % kVirtualHeightPx) / kTilePx;
    const int r0 = std::max(0, -ty), r1 = std::min(kTilePx, fb.height() - ty);
    for (int tx = -phase_x; tx < fb.width(); tx += kTilePx) {
      const int col = ((scroll.x + tx) % kVirtualWidthPx) / kTilePx;
      const Patch* patch = sheet.find(nt.cell(col, row));
      if (!patch) patch = &placeholder_patch();
      const int c0 = std::max(0, -tx), c1 = std::min(kTilePx, fb.width() - tx);
      if (c0 == 0 && c1 == kTilePx) {
        for (int r = r0; r < r1; ++r) {
          std::memcpy(fb.row(ty + r).data() + tx, patch->rgb.data() + r * kTilePx, sizeof(Rgb) * kTilePx);
        }
        continue;
      }
      for (int r = r0; r < r1; ++r) {
        std::copy(patch->rgb.begin() + r * kTilePx + c0, patch->rgb.begin() + r * kTilePx + c1,
                  fb.row(ty + r).begin() + tx + c0);
      }
    }
  }
}

void draw_sprites(Framebuffer& fb, const std::vector<SpriteEntry>& sprites, const PatternSheet& sheet) {
  // Lower OAM index wins, so paint back to front.
  for (auto it = sprites.rbegin(); it != sprites.rend(); ++it) {
    if (!it->visible) continue;
    const Patch* patch = sheet.find(it->tile);
    if (!patch) patch = &placeholder_patch();
    for (int r = 0; r < kTilePx; ++r) {
      const int y = it->y + r;
      if (y < 0 || y >= fb.height()) continue;
      const int src_r = it->flip_v ? kTilePx - 1 - r : r;
      for (int c = 0; c < kTilePx; ++c) {
        const int x = it->x + c;
        if (x < 0 || x >= fb.width()) continue;
        const int src_c = it->flip_h ? kTilePx - 1 - c : c;
        fb.at(x, y) = patch->rgb[static_cast<std::size_t>(src_r * kTilePx + src_c)];
      }
    }
  }
}

}  // namespace

Framebuffer SyntheticConsole::render() const {
  Framebuffer fb;
  draw_background(fb, loaded_nametables(), *patterns_, scroll_register());
  draw_sprites(fb, sprites(), *patterns_);
  return fb;
}

namespace {

/// Paints window luma one row at a time, top to bottom, so a comparison can
/// stop at the first row that differs.
class LumaRowPainter {
 public:
  LumaRowPainter(const ScrollWindow& window, const NametableView& nt, const PatternSheet& sheet, ScrollRegister scroll,
                 std::vector<SpriteEntry> sprites)
      : window_(window),
        nt_(nt),
        sheet_(sheet),
        scroll_(scroll),
        sprites_(std::move(sprites)),
        patches_(static_cast<std::size_t>(window.w / kTilePx + 2)),
        first_col_((scroll.x + window.x) / kTilePx),
        phase_x_((scroll.x + window.x) % kTilePx) {
    // Lower OAM index wins, so paint back to front.
    std::reverse(sprites_.begin(), sprites_.end());
    std::erase_if(sprites_, [](const SpriteEntry& e) { return !e.visible; });
  }

  void paint(int y, std::uint8_t* dst) {
    const int vy = (scroll_.y + window_.y + y) % kVirtualHeightPx;
    const int row = vy / kTilePx, r = vy % kTilePx;
    if (row != loaded_row_) {
      for (std::size_t i = 0; i < patches_.size(); ++i) patches_[i] = lookup(nt_.cell(first_col_ + static_cast<int>(i), row));
      loaded_row_ = row;
    }
    const int lead = std::min(kTilePx - phase_x_, window_.w);
    std::memcpy(dst, patches_[0]->luma.data() + r * kTilePx + phase_x_, static_cast<std::size_t>(lead));
    int x = lead;
    std::size_t i = 1;
    for (; x + kTilePx <= window_.w; x += kTilePx, ++i) std::memcpy(dst + x, patches_[i]->luma.data() + r * kTilePx, kTilePx);
    if (x < window_.w) std::memcpy(dst + x, patches_[i]->luma.data() + r * kTilePx, static_cast<std::size_t>(window_.w - x));

    const int sy = window_.y + y;
    for (const auto& e : sprites_) {
      if (sy < e.y || sy >= e.y + kTilePx) continue;
      const Patch* patch = lookup(e.tile);
      const int src_r = e.flip_v ? kTilePx - 1 - (sy - e.y) : sy - e.y;
      for (int c = 0; c < kTilePx; ++c) {
        const int wx = e.x + c - window_.x;
        if (wx < 0 || wx >= window_.w) continue;
        const int src_c = e.flip_h ? kTilePx - 1 - c : c;
        dst[wx] = patch->luma[static_cast<std::size_t>(src_r * kTilePx + src_c)];
      }
    }
  }

 private:
  const Patch* lookup(const TileKey& key) const {
    const Patch* p = sheet_.find(key);
    return p ? p : &placeholder_patch();
  }

  const ScrollWindow& window_;
  const NametableView& nt_;
  const PatternSheet& sheet_;
  ScrollRegister scroll_;
  std::vector<SpriteEntry> sprites_;
  std::vector<const Patch*> patches_;
  int first_col_;
  int phase_x_;
  int loaded_row_ = -1;
};

}  // namespace

void SyntheticConsole::render_window_luma(const ScrollWindow& window, std::vector<std::uint8_t>& out) const {
  out.resize(static_cast<std::size_t>(window.w) * window.h);
  LumaRowPainter painter(window, loaded_nametables(), *patterns_, scroll_register(), sprites());
  for (int y = 0; y < window.h; ++y) painter.paint(y, out.data() + static_cast<std::size_t>(y) * window.w);
}

bool SyntheticConsole::window_luma_matches(const ScrollWindow& window, std::span<const std::uint8_t> expected) const {
  if (expected.size() != static_cast<std::size_t>(window.w) * window.h) return false;
  LumaRowPainter painter(window, loaded_nametables(), *patterns_, scroll_register(), sprites());
  std::vector<std::uint8_t> row(static_cast<std::size_t>(window.w));
  for (int y = 0; y < window.h; ++y) {
    painter.paint(y, row.data());
    if (!std::equal(row.begin(), row.end(), expected.begin() + static_cast<std::ptrdiff_t>(y) * window.w)) return false;
  }
  return true;
}

FrameObservation SyntheticConsole::observe() const {
  FrameObservation obs;
  obs.frame_index = next_frame_ - 1;
  obs.nametables = nametables();
  obs.sprites = sprites();
  obs.patterns = patterns_;
  obs.reported_scroll = scroll_register();
  draw_background(obs.framebuffer, obs.nametables, *patterns_, obs.reported_scroll);
  draw_sprites(obs.framebuffer, obs.sprites, *patterns_);
  return obs;
}

SaveState SyntheticConsole::save_state() const {
  SaveState st;
  st.frame_index = next_frame_;
  st.bytes.reserve(40);
  put(st.bytes, kStateMagic);
  put(st.bytes, kStateVersion);
  put(st.bytes, fingerprint_);
  put(st.bytes, static_cast<std::int64_t>(next_frame_));
  put(st.bytes, static_cast<std::int32_t>(world_));
  put(st.bytes, static_cast<std::int32_t>(cam_x_));
  put(st.bytes, static_cast<std::int32_t>(cam_y_));
  return st;
}

void SyntheticConsole::load_state(const SaveState& state) {
  std::size_t pos = 0;
  if (get<std::uint32_t>(state.bytes, pos) != kStateMagic) throw Error("not a synthetic console savestate");
  if (const auto v = get<std::uint32_t>(state.bytes, pos); v != kStateVersion) {
    throw Error("savestate version " + std::to_string(v) + " is not supported");
  }
  if (get<std::uint64_t>(state.bytes, pos) != fingerprint_) {
    throw Error("savestate was taken from a different world script");
  }
  const auto frame = get<std::int64_t>(state.bytes, pos);
  const auto world = get<std::int32_t>(state.bytes, pos);
  const auto x = get<std::int32_t>(state.bytes, pos);
  const auto y = get<std::int32_t>(state.bytes, pos);
  if (pos != state.bytes.size() || world < 0 || static_cast<std::size_t>(world) >= worlds_.size() || frame < 0) {
    throw Error("savestate is malformed");
  }

  // Rewinding only needs a fresh copy of the worlds when a change already applied lies ahead of `frame`.
  const auto& changes = script_->tile_changes;
  if (next_tile_change_ > 0 && changes[next_tile_change_ - 1].frame >= frame) reset_worlds();
  apply_tile_changes_through(frame - 1);
  next_frame_ = frame;
  world_ = world;
  cam_x_ = x;
  cam_y_ = y;
}

std::unique_ptr<Console> SyntheticConsole::clone() const { return std::make_unique<SyntheticConsole>(*this); }

// ---------------------------------------------------------------------------

int TruthRoom::visited_count() const { return static_cast<int>(std::count(visited.begin(), visited.end(), true)); }

bool tile_half_visible(int col, int row, int cam_x, int cam_y, const ScrollWindow& window) {
  const int left = cam_x + window.x, top = cam_y + window.y;
  const int vis_w = std::min(col * kTilePx + kTilePx, left + window.w) - std::max(col * kTilePx, left);
  const int vis_h = std::min(row * kTilePx + kTilePx, top + window.h) - std::max(row * kTilePx, top);
  return vis_w * 2 >= kTilePx && vis_h * 2 >= kTilePx;
}

GroundTruth ground_truth(std::shared_ptr<const WorldScript> script, std::span<const ButtonSet> inputs,
                         const ScrollWindow& window) {
  GroundTruth gt;
  const WorldScript& s = *script;
  SyntheticConsole console(script);
  gt.control = s.controls;

  const auto frames = static_cast<FrameIndex>(inputs.size());

  // Room boundaries: [frame of loss start, frame room begins].
  struct Boundary {
    TransitionKind kind;
    FrameIndex leave;
    FrameIndex enter;
  };
  std::vector<Boundary> bounds;
  for (const auto& a : s.autoscrolls) {
    const long total_x = static_cast<long>(a.dx) * a.frames.length();
    const long total_y = static_cast<long>(a.dy) * a.frames.length();
    if (std::abs(total_x) * 2 < window.w && std::abs(total_y) * 2 < window.h) continue;
    FrameIndex regain = a.frames.end;
    FrameIndex best = -1;
    for (const auto& c : s.controls) {
      if (c.frames.begin >= a.frames.end && (best < 0 || c.frames.begin < best)) best = c.frames.begin;
    }
    if (best >= 0) regain = best;
    bounds.push_back({TransitionKind::Scroll, a.frames.begin, regain});
  }
  for (const auto& tp : s.teleports) bounds.push_back({TransitionKind::Teleport, tp.frame, tp.frame});
  std::sort(bounds.begin(), bounds.end(), [](const Boundary& a, const Boundary& b) { return a.leave < b.leave; });
  std::erase_if(bounds, [&](const Boundary& b) { return b.enter >= frames; });

  auto new_room = [&](FrameIndex first) {
    TruthRoom r;
    r.first_frame = first;
    gt.rooms.push_back(std::move(r));
  };
  new_room(0);
  std::size_t next_bound = 0;
  bool between = false;
  std::vector<bool> seen_sprite(s.sprites.size(), false);

  for (FrameIndex t = 0; t < frames; ++t) {
    console.advance(inputs[static_cast<std::size_t>(t)]);
    gt.camera.push_back({console.current_world_index(), console.camera_x(), console.camera_y()});

    while (next_bound < bounds.size()) {
      const auto& b = bounds[next_bound];
      if (!between && t == b.leave && b.leave != b.enter) {
        gt.rooms.back().end_frame = t;
        between = true;
        break;
      }
      if (t == b.enter) {
        if (!between) gt.rooms.back().end_frame = t;
        const int from = static_cast<int>(gt.rooms.size()) - 1;
        new_room(t);
        gt.transitions.push_back({b.kind, t, from, from + 1});
        between = false;
        ++next_bound;
        continue;
      }
      break;
    }

    const int room_index = between ? -1 : static_cast<int>(gt.rooms.size()) - 1;
    if (!between) {
      TruthRoom& room = gt.rooms.back();
      const World& w = console.current_world();
      if (t == room.first_frame) {
        room.world = console.current_world_index();
        room.camera_x = console.camera_x();
        room.camera_y = console.camera_y();
        room.visited.assign(static_cast<std::size_t>(w.width) * w.height, false);
      }
      const int cx = console.camera_x(), cy = console.camera_y();
      for (int row = (cy + window.y) / kTilePx; row <= (cy + window.y + window.h - 1) / kTilePx; ++row) {
        for (int col = (cx + window.x) / kTilePx; col <= (cx + window.x + window.w - 1) / kTilePx; ++col) {
          if (col < w.width && row < w.height && tile_half_visible(col, row, cx, cy, window)) {
            room.visited[static_cast<std::size_t>(row) * w.width + col] = true;
          }
        }
      }
    }

    const auto sprites_now = console.sprites();
    std::size_t entry = 0;
    for (std::size_t i = 0; i < s.sprites.size(); ++i) {
      const auto& track = s.sprites[i];
      if (!track.frames.contains(t) || (track.world && *track.world != console.current_world().name)) continue;
      std::size_t cells = 0;
      for (const auto& row : track.tiles) cells += row.size();
      bool visible = false;
      for (std::size_t k = 0; k < cells && entry + k < sprites_now.size(); ++k) {
        const auto& sp = sprites_now[entry + k];
        visible = visible || (sp.visible && sp.x >= window.x && sp.y >= window.y && sp.x < window.x + window.w &&
                              sp.y < window.y + window.h);
      }
      entry += cells;
      if (visible && !seen_sprite[i]) {
        seen_sprite[i] = true;
        gt.spawns.push_back({track.id, t, room_index, track.position_at(t)});
      }
    }
  }
  if (!gt.rooms.empty() && gt.rooms.back().end_frame <= gt.rooms.back().first_frame) {
    gt.rooms.back().end_frame = frames;
  }
  gt.final_worlds.reserve(s.worlds.size());
  for (std::size_t i = 0; i < s.worlds.size(); ++i) gt.final_worlds.push_back(s.worlds[i]);
  for (const auto& tc : s.tile_changes) {
    if (tc.frame < frames) gt.final_worlds[static_cast<std::size_t>(s.world_index(tc.world))].at(tc.x, tc.y) = tc.key;
  }
  return gt;
}

}  // namespace automap::synthetic
