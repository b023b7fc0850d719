#include "automap/synthetic/world_script.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "automap/export/export.hpp"

using namespace automap;
using namespace automap::synthetic;

namespace {

const char* kMinimal =
    "[world room 34 30]\n"
    "1:0:0 2:0:0\n"
    "3:1:0*1017 4:1:0\n"
    "[palette]\n"
    "1:0:0 = " 
    "ff0000 ff0000 ff0000 ff0000 ff0000 ff0000 ff0000 ff0000 ff0000 ff0000 ff0000 ff0000 ff0000 ff0000 ff0000 ff0000 "
    "ff0000 ff0000 ff0000 ff0000 ff0000 ff0000 ff0000 ff0000 ff0000 ff0000 ff0000 ff0000 ff0000 ff0000 ff0000 ff0000 "
    "ff0000 ff0000 ff0000 ff0000 ff0000 ff0000 ff0000 ff0000 ff0000 ff0000 ff0000 ff0000 ff0000 ff0000 ff0000 ff0000 "
    "ff0000 ff0000 ff0000 ff0000 ff0000 ff0000 ff0000 ff0000 ff0000 ff0000 ff0000 ff0000 ff0000 ff0000 ff0000 0000ff\n"
    "[timeline]\n"
    "control 0..10\n"
    "autoscroll 10..20 1 0\n"
    "tilechange room 1 1 5 9:2:0\n"
    "sprite s 0..10 path=(0,0)->(9,0) tiles=5:0:1,6:0:1;7:0:1,8:0:1 world=room\n"
    "teleport 30 room 0 0\n";

#define W "[world w 32 30]\n1:0:0*960\n"

}  // namespace

TEST_CASE("a complete script parses into its parts") {
  const auto s = parse_script(kMinimal);
  REQUIRE(s.worlds.size() == 1);
  CHECK(s.worlds[0].width == 34);
  CHECK(s.worlds[0].at(1, 0) == TileKey{2, 0, 0, 0});
  CHECK(s.worlds[0].at(33, 29) == TileKey{4, 1, 0, 0});
  REQUIRE(s.palette.size() == 1);
  const Patch& p = s.palette.at(TileKey{1, 0, 0, 0});
  CHECK(p.rgb[0] == Rgb{255, 0, 0});
  CHECK(p.rgb[63] == Rgb{0, 0, 255});
  REQUIRE(s.controls.size() == 1);
  CHECK(s.controls[0].frames == FrameRange{0, 10});
  REQUIRE(s.autoscrolls.size() == 1);
  CHECK(s.autoscrolls[0].dx == 1);
  REQUIRE(s.tile_changes.size() == 1);
  CHECK(s.tile_changes[0].key == TileKey{9, 2, 0, 0});
  REQUIRE(s.sprites.size() == 1);
  CHECK(s.sprites[0].tiles.size() == 2);
  CHECK(s.sprites[0].tiles[1][1] == TileKey{8, 0, 1, 0});
  CHECK(s.sprites[0].world == std::optional<std::string>("room"));
  CHECK(s.sprites[0].position_at(5) == PixelPoint{5, 0});
  REQUIRE(s.teleports.size() == 1);
  CHECK(s.teleports[0].frame == 30);
  CHECK(s.mirroring == Mirroring::FourScreen);
}

TEST_CASE("run-length tiles, start and mirroring directives") {
  const auto s = parse_script("[world w 33 30]\n1:0:0*3 2:0:0 1:0:0*986\n[timeline]\nstart w 8 0\nmirroring vertical\n");
  CHECK(s.worlds[0].at(2, 0) == TileKey{1, 0, 0, 0});
  CHECK(s.worlds[0].at(3, 0) == TileKey{2, 0, 0, 0});
  CHECK(s.start_x == 8);
  CHECK(s.mirroring == Mirroring::Vertical);
}

TEST_CASE("grammar errors report their line") {
  auto line_of = [](const char* text) {
    try {
      parse_script(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return -1;
  };
  CHECK(line_of("[world w 32 30]\n1:0:0*959\n") == 1);  // too few tiles
  CHECK(line_of("" W "[timeline]\njump 3\n") == 4);  // unknown event
  CHECK(line_of("" W "[timeline]\ncontrol 5\n") == 4);
  CHECK(line_of("" W "[nonsense]\n") == 3);
  CHECK(line_of("1:0:0\n") == 1);
  CHECK(line_of("" W "[palette]\n1:0:0 = ff0000\n") == 4);
}

TEST_CASE("semantic errors are script errors") {
  CHECK_THROWS_AS(parse_script("" W "[timeline]\nteleport 5 nowhere 0 0\n"), ScriptError);
  CHECK_THROWS_AS(parse_script("" W "[timeline]\ntilechange w 40 3 5 1:0:0\n"), ScriptError);
  CHECK_THROWS_AS(parse_script("" W "[timeline]\ncontrol 9..3\n"), Error);
  CHECK_THROWS_AS(parse_script("" W "[timeline]\ncontrol 5..9\ncontrol 0..3\n"), ScriptError);
  CHECK_THROWS_AS(parse_script(""), Error);
  CHECK_THROWS_AS(parse_script("[world w 2 2]\n1:0:0*4\n"), ScriptError);  // smaller than the screen
  CHECK_THROWS_AS(parse_script(W "[timeline]\nstart w 8 0\n"), ScriptError);
}

TEST_CASE("procedural patches are deterministic and brighten with the palette") {
  const TileKey a{3, 0, 0, 0}, b{3, 7, 0, 0};
  CHECK(procedural_patch(a) == procedural_patch(a));
  int sum_a = 0, sum_b = 0;
  for (int i = 0; i < 64; ++i) sum_a += procedural_patch(a).luma[i], sum_b += procedural_patch(b).luma[i];
  CHECK(sum_b > sum_a + 64 * 100);
}

TEST_CASE("fingerprints track content") {
  const auto a = parse_script(kMinimal);
  auto b = a;
  CHECK(a.fingerprint() == b.fingerprint());
  b.worlds[0].at(0, 0) = TileKey{42, 0, 0, 0};
  CHECK(a.fingerprint() != b.fingerprint());
}

TEST_CASE("golden scripts parse") {
  for (const char* name : {"reference", "corridor", "long"}) {
    CAPTURE(name);
    CHECK_NOTHROW(parse_script(exporter::read_file(oracle::data_path(std::string("scripts/") + name + ".txt"))));
  }
}
