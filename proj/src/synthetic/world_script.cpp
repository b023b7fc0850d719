#include "automap/synthetic/world_script.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <unordered_set>

namespace automap::synthetic {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class Fnv1a {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= p[i];
      h_ *= 0x100000001b3ULL;
    }
  }
  void i64(std::int64_t v) { bytes(&v, sizeof v); }
  void str(std::string_view s) {
    i64(static_cast<std::int64_t>(s.size()));
    bytes(s.data(), s.size());
  }
  void key(const TileKey& k) {
    i64(k.pattern);
    i64(k.palette);
    i64(k.bank);
    i64(k.aux);
  }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

FrameIndex floor_div(FrameIndex a, FrameIndex b) {
  FrameIndex q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

// ---------------------------------------------------------------------------
// Tokenizer

struct Token {
  std::string_view text;
  int line = 0;
  int column = 0;
};

std::vector<Token> split_ws(std::string_view line, int line_no) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    out.push_back({line.substr(start, i - start), line_no, static_cast<int>(start) + 1});
  }
  return out;
}

template <typename T>
T to_int(const Token& tok, std::string_view what) {
  T v{};
  auto [ptr, ec] = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), v);
  if (ec != std::errc{} || ptr != tok.text.data() + tok.text.size() || tok.text.empty()) {
    throw ParseError("expected " + std::string(what) + ", found '" + std::string(tok.text) + "'", tok.line, tok.column);
  }
  return v;
}

TileKey to_key(const Token& tok) {
  try {
    return parse_tile_key(tok.text);
  } catch (const Error&) {
    throw ParseError("expected tile key p:pal:bank, found '" + std::string(tok.text) + "'", tok.line, tok.column);
  }
}

FrameRange to_range(const Token& tok) {
  const auto dots = tok.text.find("..");
  if (dots == std::string_view::npos) {
    throw ParseError("expected frame range f0..f1, found '" + std::string(tok.text) + "'", tok.line, tok.column);
  }
  Token a{tok.text.substr(0, dots), tok.line, tok.column};
  Token b{tok.text.substr(dots + 2), tok.line, tok.column + static_cast<int>(dots) + 2};
  FrameRange r{to_int<FrameIndex>(a, "frame"), to_int<FrameIndex>(b, "frame")};
  if (r.begin < 0 || r.end <= r.begin) {
    throw ParseError("frame range must satisfy 0 <= f0 < f1", tok.line, tok.column);
  }
  return r;
}

// "(x,y)"
PixelPoint to_point(std::string_view text, const Token& tok) {
  if (text.size() < 5 || text.front() != '(' || text.back() != ')') {
    throw ParseError("expected (x,y), found '" + std::string(text) + "'", tok.line, tok.column);
  }
  const auto inner = text.substr(1, text.size() - 2);
  const auto comma = inner.find(',');
  if (comma == std::string_view::npos) throw ParseError("expected (x,y)", tok.line, tok.column);
  return {to_int<int>(Token{inner.substr(0, comma), tok.line, tok.column}, "x"),
          to_int<int>(Token{inner.substr(comma + 1), tok.line, tok.column}, "y")};
}

void expect_args(const std::vector<Token>& toks, std::size_t n, std::string_view usage) {
  if (toks.size() != n) {
    throw ParseError("expected '" + std::string(usage) + "'", toks.front().line, toks.front().column);
  }
}

void parse_timeline_line(WorldScript& s, const std::vector<Token>& t) {
  const std::string_view op = t[0].text;
  const int line = t[0].line;
  if (op == "start") {
    expect_args(t, 4, "start WORLD sx sy");
    s.start_world = std::string(t[1].text);
    s.start_x = to_int<int>(t[2], "sx");
    s.start_y = to_int<int>(t[3], "sy");
  } else if (op == "mirroring") {
    expect_args(t, 2, "mirroring MODE");
    try {
      s.mirroring = parse_mirroring(t[1].text);
    } catch (const Error& e) {
      throw ParseError(e.what(), t[1].line, t[1].column);
    }
  } else if (op == "scroll") {
    expect_args(t, 4, "scroll f0..f1 dx dy");
    s.scrolls.push_back({to_range(t[1]), to_int<int>(t[2], "dx"), to_int<int>(t[3], "dy"), line});
  } else if (op == "control") {
    expect_args(t, 2, "control f0..f1");
    s.controls.push_back({to_range(t[1]), line});
  } else if (op == "autoscroll") {
    expect_args(t, 4, "autoscroll f0..f1 dx dy");
    s.autoscrolls.push_back({to_range(t[1]), to_int<int>(t[2], "dx"), to_int<int>(t[3], "dy"), line});
  } else if (op == "tilechange") {
    expect_args(t, 6, "tilechange WORLD x y f p:pal:bank");
    s.tile_changes.push_back({std::string(t[1].text), to_int<int>(t[2], "x"), to_int<int>(t[3], "y"),
                              to_int<FrameIndex>(t[4], "frame"), to_key(t[5]), line});
  } else if (op == "teleport") {
    expect_args(t, 5, "teleport f WORLD sx sy");
    s.teleports.push_back({to_int<FrameIndex>(t[1], "frame"), std::string(t[2].text), to_int<int>(t[3], "sx"),
                           to_int<int>(t[4], "sy"), line});
  } else if (op == "sprite") {
    if (t.size() < 5 || t.size() > 6) {
      throw ParseError("expected 'sprite ID f0..f1 path=(x0,y0)->(x1,y1) tiles=K,K;K [world=NAME]'", line,
                       t[0].column);
    }
    SpriteTrack track;
    track.id = std::string(t[1].text);
    track.frames = to_range(t[2]);
    track.line = line;
    for (std::size_t i = 3; i < t.size(); ++i) {
      const std::string_view arg = t[i].text;
      if (arg.starts_with("path=")) {
        const auto body = arg.substr(5);
        const auto arrow = body.find("->");
        if (arrow == std::string_view::npos) throw ParseError("path needs '->'", t[i].line, t[i].column);
        track.from = to_point(body.substr(0, arrow), t[i]);
        track.to = to_point(body.substr(arrow + 2), t[i]);
      } else if (arg.starts_with("tiles=")) {
        auto body = arg.substr(6);
        std::size_t row_start = 0;
        while (row_start <= body.size()) {
          const auto row_end = std::min(body.find(';', row_start), body.size());
          std::vector<TileKey> row;
          const auto row_text = body.substr(row_start, row_end - row_start);
          std::size_t k = 0;
          while (k <= row_text.size()) {
            const auto comma = std::min(row_text.find(',', k), row_text.size());
            row.push_back(to_key(Token{row_text.substr(k, comma - k), t[i].line, t[i].column}));
            k = comma + 1;
          }
          track.tiles.push_back(std::move(row));
          row_start = row_end + 1;
        }
      } else if (arg.starts_with("world=")) {
        track.world = std::string(arg.substr(6));
      } else {
        throw ParseError("unknown sprite attribute '" + std::string(arg) + "'", t[i].line, t[i].column);
      }
    }
    if (track.tiles.empty()) throw ParseError("sprite needs tiles=", line, t[0].column);
    s.sprites.push_back(std::move(track));
  } else {
    throw ParseError("unknown timeline event '" + std::string(op) + "'", line, t[0].column);
  }
}

int max_camera_x(const World& w) { return w.width * kTilePx - kScreenWidth; }
int max_camera_y(const World& w) { return w.height * kTilePx - kScreenHeight; }

bool camera_inside(const World& w, int x, int y) {
  return x >= 0 && y >= 0 && x <= max_camera_x(w) && y <= max_camera_y(w);
}

}  // namespace

PixelPoint SpriteTrack::position_at(FrameIndex t) const {
  const FrameIndex span = frames.length() - 1;
  if (span <= 0) return from;
  const FrameIndex step = t - frames.begin;
  return {from.x + static_cast<int>(floor_div(static_cast<FrameIndex>(to.x - from.x) * step, span)),
          from.y + static_cast<int>(floor_div(static_cast<FrameIndex>(to.y - from.y) * step, span))};
}

int WorldScript::world_index(std::string_view name) const {
  for (std::size_t i = 0; i < worlds.size(); ++i) {
    if (worlds[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

const World& WorldScript::world(std::string_view name) const {
  const int i = world_index(name);
  if (i < 0) throw ScriptError("unknown world '" + std::string(name) + "'", 0);
  return worlds[static_cast<std::size_t>(i)];
}

std::uint64_t WorldScript::fingerprint() const {
  Fnv1a h;
  for (const auto& w : worlds) {
    h.str(w.name);
    h.i64(w.width);
    h.i64(w.height);
    for (const auto& k : w.tiles) h.key(k);
  }
  for (const auto& [k, p] : palette) {
    h.key(k);
    h.bytes(p.rgb.data(), sizeof(p.rgb));
  }
  h.str(start_world);
  h.i64(start_x);
  h.i64(start_y);
  h.i64(static_cast<int>(mirroring));
  for (const auto& e : scrolls) {
    h.i64(e.frames.begin), h.i64(e.frames.end), h.i64(e.dx), h.i64(e.dy);
  }
  for (const auto& e : controls) h.i64(e.frames.begin), h.i64(e.frames.end);
  for (const auto& e : autoscrolls) {
    h.i64(e.frames.begin), h.i64(e.frames.end), h.i64(e.dx), h.i64(e.dy);
  }
  for (const auto& e : tile_changes) {
    h.str(e.world), h.i64(e.x), h.i64(e.y), h.i64(e.frame), h.key(e.key);
  }
  for (const auto& e : sprites) {
    h.str(e.id), h.i64(e.frames.begin), h.i64(e.frames.end);
    h.i64(e.from.x), h.i64(e.from.y), h.i64(e.to.x), h.i64(e.to.y);
    for (const auto& row : e.tiles) {
      h.i64(static_cast<std::int64_t>(row.size()));
      for (const auto& k : row) h.key(k);
    }
    h.str(e.world.value_or(""));
  }
  for (const auto& e : teleports) h.i64(e.frame), h.str(e.world), h.i64(e.x), h.i64(e.y);
  return h.value();
}

Patch procedural_patch(const TileKey& key) {
  std::uint64_t state = TileKeyHash{}(key) ^ 0x5deece66dULL;
  const int base = 16 + key.palette * 26;
  std::array<Rgb, 64> px;
  for (auto& p : px) {
    const std::uint64_t r = splitmix64(state);
    p = Rgb{static_cast<std::uint8_t>(base + (r & 0x1f) + ((r >> 5) & 0xf)),
            static_cast<std::uint8_t>(base + ((r >> 12) & 0x1f) + ((r >> 17) & 0xf)),
            static_cast<std::uint8_t>(base + ((r >> 24) & 0x1f) + ((r >> 29) & 0xf))};
  }
  return Patch::from_rgb(px);
}

Patch patch_for(const WorldScript& script, const TileKey& key) {
  auto it = script.palette.find(key);
  return it != script.palette.end() ? it->second : procedural_patch(key);
}

WorldScript parse_script(std::string_view text) {
  WorldScript script;
  enum class Section { None, World, Palette, Timeline } section = Section::None;
  World* current = nullptr;
  int world_header_line = 0;

  auto finish_world = [&] {
    if (current && current->tiles.size() != static_cast<std::size_t>(current->width) * current->height) {
      throw ParseError("world '" + current->name + "' declares " + std::to_string(current->width) + "x" +
                           std::to_string(current->height) + " tiles but lists " + std::to_string(current->tiles.size()),
                       world_header_line);
    }
    current = nullptr;
  };

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    ++line_no;
    pos = end + 1;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    auto toks = split_ws(line, line_no);
    if (toks.empty()) {
      if (end == text.size()) break;
      continue;
    }

    if (toks[0].text.starts_with('[')) {
      finish_world();
      // Rejoin so "[world NAME W H]" tokenizes the same with or without inner spaces.
      std::string header;
      for (const auto& t : toks) header += std::string(t.text) + " ";
      if (header.back() == ' ') header.pop_back();
      if (header.back() != ']') throw ParseError("unterminated section header", line_no, toks[0].column);
      const std::string inner = header.substr(1, header.size() - 2);
      auto parts = split_ws(inner, line_no);
      if (parts.empty()) throw ParseError("empty section header", line_no, toks[0].column);
      if (parts[0].text == "world") {
        if (parts.size() != 4) throw ParseError("expected '[world NAME W H]'", line_no, toks[0].column);
        World w;
        w.name = std::string(parts[1].text);
        parts[2].column = parts[3].column = toks[0].column;
        w.width = to_int<int>(parts[2], "world width");
        w.height = to_int<int>(parts[3], "world height");
        if (script.world_index(w.name) >= 0) throw ParseError("duplicate world '" + w.name + "'", line_no);
        script.worlds.push_back(std::move(w));
        current = &script.worlds.back();
        world_header_line = line_no;
        section = Section::World;
      } else if (parts[0].text == "palette" && parts.size() == 1) {
        section = Section::Palette;
      } else if (parts[0].text == "timeline" && parts.size() == 1) {
        section = Section::Timeline;
      } else {
        throw ParseError("unknown section '" + inner + "'", line_no, toks[0].column);
      }
      continue;
    }

    switch (section) {
      case Section::None:
        throw ParseError("content before the first section", line_no, toks[0].column);
      case Section::World:
        for (const auto& tok : toks) {
          // KEY or KEY*N run-length shorthand.
          const auto star = tok.text.find('*');
          const Token key_tok{tok.text.substr(0, star), tok.line, tok.column};
          const TileKey key = to_key(key_tok);
          int repeat = 1;
          if (star != std::string_view::npos) {
            repeat = to_int<int>(Token{tok.text.substr(star + 1), tok.line, tok.column}, "repeat count");
            if (repeat <= 0) throw ParseError("repeat count must be positive", tok.line, tok.column);
          }
          current->tiles.insert(current->tiles.end(), static_cast<std::size_t>(repeat), key);
        }
        break;
      case Section::Palette: {
        if (toks.size() != 66 || toks[1].text != "=") {
          throw ParseError("expected 'p:pal:bank = ' followed by 64 hex RGB triples", line_no, toks[0].column);
        }
        const TileKey key = to_key(toks[0]);
        std::array<Rgb, 64> px;
        for (std::size_t i = 0; i < 64; ++i) {
          const Token& t = toks[i + 2];
          std::uint32_t v = 0;
          auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v, 16);
          if (t.text.size() != 6 || ec != std::errc{} || ptr != t.text.data() + t.text.size()) {
            throw ParseError("expected 6-digit hex RGB, found '" + std::string(t.text) + "'", t.line, t.column);
          }
          px[i] = Rgb{static_cast<std::uint8_t>(v >> 16), static_cast<std::uint8_t>(v >> 8), static_cast<std::uint8_t>(v)};
        }
        script.palette[key] = Patch::from_rgb(px);
        break;
      }
      case Section::Timeline:
        parse_timeline_line(script, toks);
        break;
    }
    if (end == text.size()) break;
  }
  finish_world();
  if (script.start_world.empty() && !script.worlds.empty()) script.start_world = script.worlds.front().name;
  validate(script);
  return script;
}

void validate(const WorldScript& s) {
  if (s.worlds.empty()) throw ScriptError("script defines no world", 0);
  for (const auto& w : s.worlds) {
    if (w.width * kTilePx < kScreenWidth || w.height * kTilePx < kScreenHeight) {
      throw ScriptError("world '" + w.name + "' is smaller than the 32x30 viewport", 0);
    }
    if (w.tiles.size() != static_cast<std::size_t>(w.width) * w.height) {
      throw ScriptError("world '" + w.name + "' has the wrong number of tiles", 0);
    }
  }
  const int start = s.world_index(s.start_world);
  if (start < 0) throw ScriptError("start world '" + s.start_world + "' is not defined", 0);
  if (!camera_inside(s.worlds[static_cast<std::size_t>(start)], s.start_x, s.start_y)) {
    throw ScriptError("start position puts the viewport outside world '" + s.start_world + "'", 0);
  }

  auto increasing = [](const auto& events, auto begin_of, std::string_view kind) {
    for (std::size_t i = 1; i < events.size(); ++i) {
      if (begin_of(events[i]) <= begin_of(events[i - 1])) {
        throw ScriptError(std::string(kind) + " events must have strictly increasing frames", events[i].line);
      }
    }
  };
  increasing(s.scrolls, [](const ScrollSegment& e) { return e.frames.begin; }, "scroll");
  increasing(s.controls, [](const ControlWindow& e) { return e.frames.begin; }, "control");
  increasing(s.autoscrolls, [](const AutoscrollWindow& e) { return e.frames.begin; }, "autoscroll");
  increasing(s.teleports, [](const Teleport& e) { return e.frame; }, "teleport");
  for (std::size_t i = 1; i < s.tile_changes.size(); ++i) {
    if (s.tile_changes[i].frame < s.tile_changes[i - 1].frame) {
      throw ScriptError("tilechange events must be in frame order", s.tile_changes[i].line);
    }
  }

  for (const auto& tc : s.tile_changes) {
    const int wi = s.world_index(tc.world);
    if (wi < 0) throw ScriptError("tilechange names unknown world '" + tc.world + "'", tc.line);
    const auto& w = s.worlds[static_cast<std::size_t>(wi)];
    if (tc.x < 0 || tc.y < 0 || tc.x >= w.width || tc.y >= w.height || tc.frame < 0) {
      throw ScriptError("tilechange outside world '" + tc.world + "'", tc.line);
    }
  }
  std::unordered_set<std::string> ids;
  for (const auto& sp : s.sprites) {
    if (!ids.insert(sp.id).second) throw ScriptError("duplicate sprite id '" + sp.id + "'", sp.line);
    if (sp.world && s.world_index(*sp.world) < 0) {
      throw ScriptError("sprite names unknown world '" + *sp.world + "'", sp.line);
    }
    for (const auto& row : sp.tiles) {
      if (row.empty()) throw ScriptError("sprite layout rows must not be empty", sp.line);
    }
  }
  for (const auto& tp : s.teleports) {
    const int wi = s.world_index(tp.world);
    if (wi < 0) throw ScriptError("teleport names unknown world '" + tp.world + "'", tp.line);
    if (!camera_inside(s.worlds[static_cast<std::size_t>(wi)], tp.x, tp.y)) {
      throw ScriptError("teleport puts the viewport outside world '" + tp.world + "'", tp.line);
    }
  }

  // Replay the scripted camera motion (no player input) and make sure it never
  // leaves the world.
  FrameIndex horizon = 0;
  for (const auto& e : s.scrolls) horizon = std::max(horizon, e.frames.end);
  for (const auto& e : s.autoscrolls) horizon = std::max(horizon, e.frames.end);
  for (const auto& e : s.teleports) horizon = std::max(horizon, e.frame + 1);
  const World* world = &s.worlds[static_cast<std::size_t>(start)];
  int x = s.start_x, y = s.start_y;
  std::size_t next_teleport = 0;
  for (FrameIndex t = 0; t < horizon; ++t) {
    while (next_teleport < s.teleports.size() && s.teleports[next_teleport].frame == t) {
      const auto& tp = s.teleports[next_teleport++];
      world = &s.world(tp.world);
      x = tp.x;
      y = tp.y;
    }
    for (const auto& e : s.scrolls) {
      if (!e.frames.contains(t)) continue;
      x += e.dx;
      y += e.dy;
      if (!camera_inside(*world, x, y)) {
        throw ScriptError("scroll moves the viewport outside world '" + world->name + "' at frame " + std::to_string(t),
                          e.line);
      }
    }
    for (const auto& e : s.autoscrolls) {
      if (!e.frames.contains(t)) continue;
      x += e.dx;
      y += e.dy;
      if (!camera_inside(*world, x, y)) {
        throw ScriptError(
            "autoscroll moves the viewport outside world '" + world->name + "' at frame " + std::to_string(t), e.line);
      }
    }
  }
}

}  // namespace automap::synthetic
