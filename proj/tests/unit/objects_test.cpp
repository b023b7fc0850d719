#include <algorithm>
#include <random>
#include <set>

#include "automap/objects/object_tracker.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace automap;
using namespace automap::objects;

namespace {

SpriteEntry sprite(int x, int y, std::uint8_t pattern, std::uint8_t palette = 0) {
  SpriteEntry s;
  s.x = x;
  s.y = y;
  s.tile = TileKey{pattern, palette, 1, 0};
  return s;
}

Blob blob_at(int x, int y, std::vector<LayoutCell> layout = {}) {
  Blob b;
  b.x = x;
  b.y = y;
  b.layout = std::move(layout);
  return b;
}

}  // namespace

TEST_CASE("grouping agrees with a flood-fill oracle on random sprite sets") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    std::uniform_int_distribution<int> count(0, 24), coord(0, 80), vis(0, 9);
    std::vector<SpriteEntry> sprites;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
      auto s = sprite(coord(rng), coord(rng), static_cast<std::uint8_t>(i));
      s.visible = vis(rng) != 0;
      sprites.push_back(s);
    }
    const auto expected = oracle::sprite_components(sprites);
    const auto blobs = group(sprites, 7);
    REQUIRE(blobs.size() == expected.size());

    std::set<std::set<int>> want, got;
    for (const auto& comp : expected) want.insert(std::set<int>(comp.begin(), comp.end()));
    for (const auto& b : blobs) {
      CHECK(b.frame == 7);
      std::set<int> ids;
      for (const auto& m : b.members) ids.insert(m.tile.pattern);
      got.insert(ids);
      int min_x = 1 << 20, min_y = 1 << 20;
      for (const auto& m : b.members) min_x = std::min(min_x, m.x), min_y = std::min(min_y, m.y);
      CHECK(b.x == min_x);
      CHECK(b.y == min_y);
      CHECK(b.layout.size() == b.members.size());
      CHECK(std::is_sorted(b.layout.begin(), b.layout.end()));
    }
    CHECK(got == want);
    for (std::size_t i = 1; i < blobs.size(); ++i) {
      CHECK(std::tie(blobs[i - 1].y, blobs[i - 1].x) <= std::tie(blobs[i].y, blobs[i].x));
    }
  }
}

TEST_CASE("sprites 9 px apart join, 10 px apart do not") {
  std::vector<SpriteEntry> near{sprite(0, 0, 1), sprite(9, 9, 2)};
  CHECK(group(near).size() == 1);
  std::vector<SpriteEntry> far{sprite(0, 0, 1), sprite(10, 0, 2)};
  CHECK(group(far).size() == 2);
}

TEST_CASE("a two-tile object gets a layout relative to its top-left") {
  std::vector<SpriteEntry> s{sprite(128, 88, 6, 2), sprite(120, 88, 5, 2)};
  const auto blobs = group(s);
  REQUIRE(blobs.size() == 1);
  CHECK(blobs[0].x == 120);
  CHECK(blobs[0].y == 88);
  CHECK(blobs[0].width == 16);
  CHECK(blobs[0].height == 8);
  REQUIRE(blobs[0].layout.size() == 2);
  CHECK(blobs[0].layout[0].dx == 0);
  CHECK(blobs[0].layout[0].key.pattern == 5);
  CHECK(blobs[0].layout[1].dx == 8);
}

TEST_CASE("layout similarity is a Jaccard index") {
  const TileKey a{1, 0, 0, 0}, b{2, 0, 0, 0}, c{3, 0, 0, 0};
  std::vector<LayoutCell> x{{0, 0, a}, {8, 0, b}};
  std::vector<LayoutCell> y{{0, 0, a}, {8, 0, c}};
  CHECK(layout_similarity(x, x) == doctest::Approx(1.0));
  CHECK(layout_similarity(x, y) == doctest::Approx(1.0 / 3.0));
  CHECK(layout_similarity({}, {}) == doctest::Approx(1.0));
  CHECK(layout_similarity(x, {}) == doctest::Approx(0.0));
}

TEST_CASE("hungarian matches exhaustive search on random matrices up to 6x6") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> val(-10.0, 10.0);
  std::uniform_int_distribution<int> dim(1, 6), coarse(0, 3);
  for (int trial = 0; trial < 500; ++trial) {
    const int cols = dim(rng);
    const int rows = std::uniform_int_distribution<int>(1, cols)(rng);
    const bool ties = trial % 2 == 0;
    std::vector<std::vector<double>> cost(rows, std::vector<double>(cols));
    for (auto& row : cost)
      for (auto& v : row) v = ties ? coarse(rng) : val(rng);
    const auto assign = hungarian(cost);
    REQUIRE(assign.size() == static_cast<std::size_t>(rows));
    std::set<int> used;
    double total = 0;
    for (int r = 0; r < rows; ++r) {
      REQUIRE(assign[r] >= 0);
      REQUIRE(assign[r] < cols);
      used.insert(assign[r]);
      total += cost[r][assign[r]];
    }
    CHECK(used.size() == static_cast<std::size_t>(rows));
    CHECK(total == doctest::Approx(oracle::assignment_brute(cost)).epsilon(1e-9));
  }
}

TEST_CASE("hungarian rejects more rows than columns") {
  CHECK_THROWS_AS(hungarian({{1.0}, {2.0}}), Error);
  CHECK(hungarian({}).empty());
}

TEST_CASE("match weight combines distance and layout, and gates on distance") {
  const TileKey a{1, 0, 0, 0};
  MatchParams p;  // max_dist 16, alpha 0.5, beta 0.5
  TrackHead t{100, 50, {{0, 0, a}}};
  CHECK(match_weight(t, blob_at(100, 50, {{0, 0, a}}), p) == doctest::Approx(1.0));
  CHECK(match_weight(t, blob_at(108, 50, {{0, 0, a}}), p) == doctest::Approx(0.75));
  CHECK(match_weight(t, blob_at(116, 50, {}), p) == doctest::Approx(0.0));
  CHECK(match_weight(t, blob_at(117, 50, {{0, 0, a}}), p) < 0.0);
}

TEST_CASE("matching never pairs beyond max_dist and prefers the better total") {
  const TileKey a{1, 0, 0, 0}, b{2, 0, 0, 0};
  MatchParams p;
  std::vector<TrackHead> tracks{{0, 0, {{0, 0, a}}}, {10, 0, {{0, 0, b}}}};
  std::vector<Blob> blobs{blob_at(9, 0, {{0, 0, b}}), blob_at(1, 0, {{0, 0, a}}), blob_at(200, 200, {{0, 0, a}})};
  const auto m = match(tracks, blobs, p);
  CHECK(m == std::vector<int>{1, 0, -1});
}

TEST_CASE("zero-weight pairs stay unmatched") {
  MatchParams p;
  std::vector<TrackHead> tracks{{0, 0, {{0, 0, TileKey{1, 0, 0, 0}}}}};
  std::vector<Blob> blobs{blob_at(16, 0, {{0, 0, TileKey{2, 0, 0, 0}}})};
  CHECK(match(tracks, blobs, p) == std::vector<int>{-1});
}

TEST_CASE("tracker follows a moving object and coasts through a short gap") {
  TrackerParams params;
  params.coast = 3;
  Tracker tr(params);
  const TileKey k{5, 2, 1, 0};
  for (FrameIndex t = 0; t < 20; ++t) {
    if (t >= 8 && t < 11) {
      tr.update(t, 0, {});
      continue;
    }
    std::vector<SpriteEntry> s{sprite(40 + static_cast<int>(t), 60, 5, 2)};
    const auto blobs = group(s, t);
    tr.update(t, 0, blobs);
  }
  REQUIRE(tr.tracks().size() == 1);
  CHECK(tr.tracks()[0].frames.size() == 17);
  CHECK(tr.tracks()[0].first_seen() == 0);
  CHECK(tr.tracks()[0].last_seen() == 19);
  CHECK(tr.tracks()[0].frames[0].layout[0].key == k);
}

TEST_CASE("a gap longer than coast starts a new track") {
  TrackerParams params;
  params.coast = 2;
  Tracker tr(params);
  std::vector<SpriteEntry> s{sprite(40, 60, 5)};
  const auto blobs = group(s);
  tr.update(0, 0, blobs);
  tr.update(1, 0, blobs);
  tr.update(5, 0, blobs);
  CHECK(tr.tracks().size() == 2);
}

TEST_CASE("end_room closes tracks so identities do not cross rooms") {
  Tracker tr;
  std::vector<SpriteEntry> s{sprite(40, 60, 5)};
  const auto blobs = group(s);
  tr.update(0, 0, blobs);
  tr.end_room();
  tr.update(1, 1, blobs);
  REQUIRE(tr.tracks().size() == 2);
  CHECK(tr.tracks()[0].room == 0);
  CHECK(tr.tracks()[1].room == 1);
}

TEST_CASE("exclusions parse, match by key multiset and mark tracks") {
  const auto ex = parse_exclusions("# hud\nexclude 6:2:1,5:2:1\n\nexclude 9:0:0 # coin\n");
  REQUIRE(ex.signatures.size() == 2);
  std::vector<LayoutCell> layout{{0, 0, TileKey{5, 2, 1, 0}}, {8, 0, TileKey{6, 2, 1, 0}}};
  CHECK(ex.matches(layout));
  std::vector<LayoutCell> other{{0, 0, TileKey{5, 2, 1, 0}}};
  CHECK_FALSE(ex.matches(other));

  std::vector<ObjectTrack> tracks(2);
  tracks[0].frames.push_back({0, 0, 0, layout});
  tracks[1].frames.push_back({0, 0, 0, other});
  apply_exclusions(tracks, ex);
  CHECK(tracks[0].excluded);
  CHECK_FALSE(tracks[1].excluded);
}

TEST_CASE("malformed exclusion lines report their line") {
  try {
    parse_exclusions("exclude 1:0:0\nexclude 1:x:0\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_exclusions("include 1:0:0\n"), ParseError);
  CHECK_THROWS_AS(parse_exclusions("exclude 1:0:0 extra\n"), ParseError);
}

TEST_CASE("placement converts first-seen room pixels into grid pixels") {
  std::vector<tiles::NormalizedRoom> rooms(2);
  rooms[0].id = 0;
  rooms[1].id = 1;
  rooms[1].offset_x = 2;
  rooms[1].offset_y = -1;
  std::vector<ObjectTrack> tracks(3);
  tracks[0].id = 0;
  tracks[0].room = 1;
  tracks[0].frames.push_back({12, 120, 88, {}});
  tracks[0].frames.push_back({13, 122, 88, {}});
  tracks[1].id = 1;
  tracks[1].room = 1;
  tracks[1].excluded = true;
  tracks[1].frames.push_back({3, 0, 0, {}});
  tracks[2].id = 2;
  tracks[2].room = -1;
  tracks[2].frames.push_back({3, 0, 0, {}});
  place(tracks, rooms);
  CHECK(rooms[0].placements.empty());
  REQUIRE(rooms[1].placements.size() == 1);
  CHECK(rooms[1].placements[0].track == 0);
  CHECK(rooms[1].placements[0].frame == 12);
  CHECK(rooms[1].placements[0].x == 136);
  CHECK(rooms[1].placements[0].y == 80);
}
