#include "automap/export/session.hpp"

#include <algorithm>
#include <filesystem>

#include "json.hpp"

namespace automap::exporter {

using Json = nlohmann::ordered_json;
using tiles::LayoutCell;

merge::Catalog Session::catalog() const {
  merge::Catalog c(static_cast<int>(rooms.size()), suggestions);
  c.apply(decisions);
  return c;
}

merge::MergedGraph Session::merged() const { return merge::merged_graph(graph, catalog(), rooms); }

Legend Session::legend() const {
  Legend legend;
  legend.assign_grids(rooms, config.representative);
  legend.assign_rest(rooms);
  for (const auto& t : tracks) {
    for (const auto& f : t.frames) {
      for (const auto& c : f.layout) legend.assign(c.key);
    }
  }
  return legend;
}

void resuggest(Session& session, double tau) {
  std::vector<merge::RoomGrid> grids;
  for (const auto& r : session.rooms) grids.push_back(merge::RoomGrid::from(r, session.config.representative));
  session.config.tau = tau;
  session.suggestions = merge::suggest(grids, tau);
}

namespace {

constexpr char kHex[] = "0123456789abcdef";

std::string patch_hex(const Patch& p) {
  std::string s;
  s.reserve(64 * 6);
  for (const Rgb& c : p.rgb) {
    for (std::uint8_t v : {c.r, c.g, c.b}) {
      s += kHex[v >> 4];
      s += kHex[v & 15];
    }
  }
  return s;
}

Patch patch_from_hex(const std::string& s) {
  if (s.size() != 64 * 6) throw Error("pattern must be 384 hex digits");
  auto nib = [&](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw Error("pattern has a non-hex digit");
  };
  std::array<Rgb, 64> px;
  for (std::size_t i = 0; i < 64; ++i) {
    auto byte = [&](std::size_t k) { return static_cast<std::uint8_t>(nib(s[i * 6 + k]) * 16 + nib(s[i * 6 + k + 1])); };
    px[i] = {byte(0), byte(2), byte(4)};
  }
  return Patch::from_rgb(px);
}

Json window_json(const ScrollWindow& w) { return Json::array({w.x, w.y, w.w, w.h}); }

ScrollWindow window_from(const Json& j) {
  return {j.at(0).get<int>(), j.at(1).get<int>(), j.at(2).get<int>(), j.at(3).get<int>()};
}

Json config_json(const RunConfig& c) {
  Json sigs = Json::array();
  for (const auto& sig : c.exclusions.signatures) {
    Json keys = Json::array();
    for (const auto& k : sig) keys.push_back(to_string(k));
    sigs.push_back(std::move(keys));
  }
  return Json{
      {"core", c.core},
      {"script", c.script},
      {"movie", c.movie},
      {"window", window_json(c.window)},
      {"frame_skip", c.frame_skip},
      {"scroll_method", std::string(to_string(c.method))},
      {"search_radius", c.search_radius},
      {"probe", c.probe},
      {"control_lookahead", c.control_lookahead},
      {"control_stride", c.control_stride},
      {"loss_threshold", c.loss_threshold},
      {"teleport_delta", c.teleport_delta},
      {"refractory", c.refractory},
      {"track_max_dist", c.tracker.match.max_dist},
      {"track_alpha", c.tracker.match.alpha},
      {"track_beta", c.tracker.match.beta},
      {"track_coast", c.tracker.coast},
      {"exclusions", std::move(sigs)},
      {"tau", c.tau},
      {"representative", std::string(to_string(c.representative))},
  };
}

RunConfig config_from(const Json& j) {
  RunConfig c;
  c.core = j.at("core").get<std::string>();
  c.script = j.at("script").get<std::string>();
  c.movie = j.at("movie").get<std::string>();
  c.window = window_from(j.at("window"));
  c.frame_skip = j.at("frame_skip").get<int>();
  c.method = scroll::parse_method(j.at("scroll_method").get<std::string>());
  c.search_radius = j.at("search_radius").get<int>();
  c.probe = j.at("probe").get<bool>();
  c.control_lookahead = j.at("control_lookahead").get<int>();
  c.control_stride = j.at("control_stride").get<int>();
  c.loss_threshold = j.at("loss_threshold").get<int>();
  c.teleport_delta = j.at("teleport_delta").get<double>();
  c.refractory = j.at("refractory").get<int>();
  c.tracker.match.max_dist = j.at("track_max_dist").get<double>();
  c.tracker.match.alpha = j.at("track_alpha").get<double>();
  c.tracker.match.beta = j.at("track_beta").get<double>();
  c.tracker.coast = j.at("track_coast").get<int>();
  for (const auto& sig : j.at("exclusions")) {
    std::vector<TileKey> keys;
    for (const auto& k : sig) keys.push_back(parse_tile_key(k.get<std::string>()));
    std::sort(keys.begin(), keys.end());
    c.exclusions.signatures.push_back(std::move(keys));
  }
  c.tau = j.at("tau").get<double>();
  c.representative = tiles::parse_representative(j.at("representative").get<std::string>());
  return c;
}

Json layout_json(std::span<const LayoutCell> layout, const Legend& legend) {
  Json a = Json::array();
  for (const auto& c : layout) a.push_back(Json::array({c.dx, c.dy, legend.symbol(c.key), c.flip_h, c.flip_v}));
  return a;
}

std::vector<LayoutCell> layout_from(const Json& j, const Legend& legend) {
  std::vector<LayoutCell> out;
  for (const auto& c : j) {
    const auto sym = c.at(2).get<std::string>();
    const auto key = legend.key(sym);
    if (!key) throw Error("layout uses unknown legend character '" + sym + "'");
    out.push_back({c.at(0).get<int>(), c.at(1).get<int>(), *key, c.at(3).get<bool>(), c.at(4).get<bool>()});
  }
  return out;
}

Json transition_json(const rooms::Transition& t) {
  return Json{{"kind", std::string(to_string(t.kind))}, {"from", t.from_room}, {"to", t.to_room}, {"frame", t.frame},
              {"dx", t.dx},  {"dy", t.dy},  {"score", t.score}};
}

rooms::Transition transition_from(const Json& j) {
  return {parse_transition_kind(j.at("kind").get<std::string>()),
          j.at("from").get<int>(),
          j.at("to").get<int>(),
          j.at("frame").get<FrameIndex>(),
          j.at("dx").get<int>(),
          j.at("dy").get<int>(),
          j.at("score").get<double>()};
}

Json cluster_json(const merge::Cluster& c) {
  return Json{{"id", c.name()}, {"members", c.members}, {"similarity", c.similarity}, {"suggested", c.suggested}};
}

merge::Cluster cluster_from(const Json& j) {
  merge::Cluster c;
  const auto name = j.at("id").get<std::string>();
  if (name.size() < 2 || name[0] != 'C') throw Error("cluster id '" + name + "' is malformed");
  c.id = std::stoi(name.substr(1));
  c.members = j.at("members").get<std::vector<int>>();
  c.similarity = j.at("similarity").get<std::vector<std::vector<double>>>();
  c.suggested = j.at("suggested").get<bool>();
  return c;
}

Json merged_section(const Session& s) {
  const merge::Catalog catalog = s.catalog();
  const merge::MergedGraph merged = merge::merged_graph(s.graph, catalog, s.rooms);
  Json current = Json::array();
  for (const auto& c : catalog.clusters()) current.push_back(cluster_json(c));
  Json nodes = Json::array();
  for (const auto& n : merged.nodes) {
    nodes.push_back(Json{{"id", n.id}, {"members", n.members}, {"width", n.width}, {"height", n.height}});
  }
  Json links = Json::array();
  for (const auto& t : merged.links) links.push_back(transition_json(t));
  return Json{{"clusters", std::move(current)}, {"nodes", std::move(nodes)}, {"links", std::move(links)}};
}

}  // namespace

std::string merged_json(const Session& session) {
  Json doc = merged_section(session);
  Json decisions = Json::array();
  for (const auto& d : session.decisions) decisions.push_back(merge::format_decision(d));
  doc["decisions"] = std::move(decisions);
  return doc.dump(1) + "\n";
}

std::string session_to_json(const Session& s) {
  const Legend legend = s.legend();
  Json doc;
  doc["schema"] = "automap-session";
  doc["schema_version"] = Session::kSchemaVersion;
  doc["config"] = config_json(s.config);
  doc["frames"] = s.frames;

  Json legend_tiles = Json::object();
  for (const auto& [ch, k] : legend.entries()) legend_tiles[ch] = to_string(k);
  doc["legend"] = Json{{"tiles", std::move(legend_tiles)}, {"unobserved", std::string(kUnobserved)}};

  Json rooms = Json::array();
  for (const auto& r : s.rooms) {
    Json grid = Json::array();
    Json histories = Json::array();
    const auto reps = r.representative_grid(s.config.representative);
    for (int y = 0; y < r.height; ++y) {
      std::string line;
      for (int x = 0; x < r.width; ++x) {
        const auto& rep = reps[static_cast<std::size_t>(y) * r.width + x];
        line += rep ? legend.symbol(*rep) : std::string(kUnobserved);
        const auto& h = r.at(x, y);
        if (h.empty()) continue;
        Json ivs = Json::array();
        for (const auto& iv : h) ivs.push_back(Json::array({iv.start, iv.end, legend.symbol(iv.key)}));
        histories.push_back(Json{{"x", x}, {"y", y}, {"intervals", std::move(ivs)}});
      }
      grid.push_back(std::move(line));
    }
    Json placements = Json::array();
    for (const auto& p : r.placements) {
      placements.push_back(Json{{"track", p.track}, {"frame", p.frame}, {"x", p.x}, {"y", p.y},
                                {"layout", layout_json(p.layout, legend)}});
    }
    rooms.push_back(Json{{"id", r.id},
                         {"width", r.width},
                         {"height", r.height},
                         {"offset", Json::array({r.offset_x, r.offset_y})},
                         {"origin_px", Json::array({r.origin_px_x, r.origin_px_y})},
                         {"first_frame", r.first_frame},
                         {"end_frame", r.end_frame},
                         {"grid", std::move(grid)},
                         {"histories", std::move(histories)},
                         {"placements", std::move(placements)}});
  }
  doc["rooms"] = std::move(rooms);

  Json spans = Json::array();
  for (const auto& r : s.graph.rooms) spans.push_back(Json{{"id", r.id}, {"first_frame", r.first_frame}, {"end_frame", r.end_frame}});
  Json links = Json::array();
  for (const auto& t : s.graph.links) links.push_back(transition_json(t));
  doc["room_spans"] = std::move(spans);
  doc["transitions"] = std::move(links);

  Json scroll = Json::array();
  for (const auto& x : s.scroll) {
    scroll.push_back(Json::array({x.frame, x.delta.dx, x.delta.dy, x.sx, x.sy, std::string(to_string(x.method)),
                                  x.confidence}));
  }
  doc["scroll"] = std::move(scroll);

  Json samples = Json::array();
  for (const auto& c : s.control) {
    samples.push_back(Json::array({c.frame, c.has_control, c.differing, c.futures, c.known}));
  }
  Json losses = Json::array();
  for (const auto& w : s.loss_windows) {
    losses.push_back(Json{{"start", w.start}, {"end", w.end}, {"provisional", w.provisional}});
  }
  doc["control"] = Json{{"samples", std::move(samples)}, {"loss_windows", std::move(losses)}};

  Json tracks = Json::array();
  for (const auto& t : s.tracks) {
    Json layouts = Json::array();
    std::vector<std::vector<LayoutCell>> seen;
    Json frames = Json::array();
    for (const auto& f : t.frames) {
      auto it = std::find(seen.begin(), seen.end(), f.layout);
      if (it == seen.end()) {
        seen.push_back(f.layout);
        layouts.push_back(layout_json(f.layout, legend));
        it = seen.end() - 1;
      }
      frames.push_back(Json::array({f.frame, f.x, f.y, it - seen.begin()}));
    }
    tracks.push_back(Json{{"id", t.id},
                          {"room", t.room},
                          {"excluded", t.excluded},
                          {"layouts", std::move(layouts)},
                          {"frames", std::move(frames)}});
  }
  doc["tracks"] = std::move(tracks);

  Json suggestions = Json::array();
  for (const auto& c : s.suggestions) suggestions.push_back(cluster_json(c));
  doc["clusters"] = std::move(suggestions);

  Json decisions = Json::array();
  for (const auto& d : s.decisions) decisions.push_back(merge::format_decision(d));
  doc["decisions"] = std::move(decisions);

  doc["merged"] = merged_section(s);

  std::vector<std::pair<TileKey, const Patch*>> pats;
  for (const auto& [k, p] : s.patterns.entries()) pats.emplace_back(k, &p);
  std::sort(pats.begin(), pats.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  Json patterns = Json::object();
  for (const auto& [k, p] : pats) patterns[to_string(k)] = patch_hex(*p);
  doc["patterns"] = std::move(patterns);

  return doc.dump(1) + "\n";
}

Session session_from_json(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("session is not valid JSON: ") + e.what());
  }
  try {
    if (doc.value("schema", std::string()) != "automap-session") throw Error("not an automap session document");
    const int version = doc.at("schema_version").get<int>();
    if (version != Session::kSchemaVersion) {
      throw Error("session schema version " + std::to_string(version) + " is not supported");
    }
    Session s;
    s.config = config_from(doc.at("config"));
    s.frames = doc.at("frames").get<FrameIndex>();

    Legend legend;
    for (const auto& [ch, k] : doc.at("legend").at("tiles").items()) {
      if (legend.assign(parse_tile_key(k.get<std::string>())) != ch) {
        throw Error("session legend character '" + ch + "' is out of assignment order");
      }
    }
    auto key_of = [&](const std::string& sym) {
      const auto k = legend.key(sym);
      if (!k) throw Error("unknown legend character '" + sym + "'");
      return *k;
    };

    for (const auto& jr : doc.at("rooms")) {
      tiles::NormalizedRoom r;
      r.id = jr.at("id").get<int>();
      r.width = jr.at("width").get<int>();
      r.height = jr.at("height").get<int>();
      r.offset_x = jr.at("offset").at(0).get<int>();
      r.offset_y = jr.at("offset").at(1).get<int>();
      r.origin_px_x = jr.at("origin_px").at(0).get<int>();
      r.origin_px_y = jr.at("origin_px").at(1).get<int>();
      r.first_frame = jr.at("first_frame").get<FrameIndex>();
      r.end_frame = jr.at("end_frame").get<FrameIndex>();
      if (r.width <= 0 || r.height <= 0) throw Error("room " + std::to_string(r.id) + " has no extent");
      r.cells.resize(static_cast<std::size_t>(r.width) * r.height);
      for (const auto& h : jr.at("histories")) {
        const int x = h.at("x").get<int>(), y = h.at("y").get<int>();
        if (x < 0 || y < 0 || x >= r.width || y >= r.height) throw Error("history outside room bounds");
        auto& cell = r.cells[static_cast<std::size_t>(y) * r.width + x];
        for (const auto& iv : h.at("intervals")) {
          cell.push_back({iv.at(0).get<FrameIndex>(), iv.at(1).get<FrameIndex>(), key_of(iv.at(2).get<std::string>())});
        }
      }
      for (const auto& p : jr.at("placements")) {
        r.placements.push_back({p.at("track").get<int>(), p.at("frame").get<FrameIndex>(), p.at("x").get<int>(),
                                p.at("y").get<int>(), layout_from(p.at("layout"), legend)});
      }
      s.rooms.push_back(std::move(r));
    }

    for (const auto& j : doc.at("room_spans")) {
      s.graph.rooms.push_back(
          {j.at("id").get<int>(), j.at("first_frame").get<FrameIndex>(), j.at("end_frame").get<FrameIndex>()});
    }
    for (const auto& j : doc.at("transitions")) s.graph.links.push_back(transition_from(j));

    for (const auto& j : doc.at("scroll")) {
      s.scroll.push_back({j.at(0).get<FrameIndex>(),
                          {j.at(1).get<int>(), j.at(2).get<int>()},
                          j.at(3).get<int>(),
                          j.at(4).get<int>(),
                          scroll::parse_method(j.at(5).get<std::string>()),
                          j.at(6).get<double>()});
    }
    for (const auto& j : doc.at("control").at("samples")) {
      s.control.push_back({j.at(0).get<FrameIndex>(), j.at(1).get<bool>(), j.at(2).get<int>(), j.at(3).get<int>(),
                           j.at(4).get<bool>()});
    }
    for (const auto& j : doc.at("control").at("loss_windows")) {
      s.loss_windows.push_back(
          {j.at("start").get<FrameIndex>(), j.at("end").get<FrameIndex>(), j.at("provisional").get<bool>()});
    }
    for (const auto& jt : doc.at("tracks")) {
      objects::ObjectTrack t;
      t.id = jt.at("id").get<int>();
      t.room = jt.at("room").get<int>();
      t.excluded = jt.at("excluded").get<bool>();
      std::vector<std::vector<LayoutCell>> layouts;
      for (const auto& l : jt.at("layouts")) layouts.push_back(layout_from(l, legend));
      for (const auto& f : jt.at("frames")) {
        const auto li = f.at(3).get<std::size_t>();
        if (li >= layouts.size()) throw Error("track frame references a missing layout");
        t.frames.push_back({f.at(0).get<FrameIndex>(), f.at(1).get<int>(), f.at(2).get<int>(), layouts[li]});
      }
      s.tracks.push_back(std::move(t));
    }
    for (const auto& j : doc.at("clusters")) s.suggestions.push_back(cluster_from(j));
    for (const auto& j : doc.at("decisions")) s.decisions.push_back(merge::parse_decision(j.get<std::string>()));
    for (const auto& [k, v] : doc.at("patterns").items()) s.patterns.set(parse_tile_key(k), patch_from_hex(v.get<std::string>()));
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("session document is malformed: ") + e.what());
  }
}

void write_exports(const Session& session, const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path root(dir);
  fs::create_directories(root / "rooms");
  auto path = [&](const std::string& rel) { return (root / rel).string(); };

  Legend legend = session.legend();
  for (const auto& r : session.rooms) {
    write_file_atomic(path(ExportLayout::room_tiles(r.id)), export_tiles(r, legend, session.config.representative));
    write_png(path(ExportLayout::room_image(r.id)), rasterize(r, session.patterns, session.config.representative));
  }
  write_file_atomic(path(ExportLayout::legend()), legend_json(legend));
  write_file_atomic(path(ExportLayout::graph()), export_dot(session.merged()));
  const merge::Catalog catalog = session.catalog();
  write_png(path(ExportLayout::atlas()),
            atlas(session.rooms, session.graph, catalog.clusters(), session.patterns, session.config.representative));
  write_file_atomic(path(ExportLayout::session()), session_to_json(session));
}

}  // namespace automap::exporter
