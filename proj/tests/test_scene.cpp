#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "qsi/rng.hpp"
#include "qsi/scene.hpp"

using namespace qsi;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("qsi_scene_test_" + name);
}

ObjectMask random_mask(StreamRng& rng) {
  const int w = 1 + static_cast<int>(rng.uniform_index(32));
  const int h = 1 + static_cast<int>(rng.uniform_index(32));
  std::vector<std::uint8_t> bits;
  bits.reserve(static_cast<std::size_t>(w) * h);
  for (int i = 0; i < w * h; ++i) bits.push_back(rng.bernoulli(0.4) ? 1 : 0);
  return ObjectMask(w, h, std::move(bits));
}

}  // namespace

TEST_CASE("pbm parsing: direct format reading") {
  const ObjectMask mask = parse_mask_pbm("P1\n2 1\n1 0\n");
  CHECK(mask.width() == 2);
  CHECK(mask.height() == 1);
  CHECK(mask.reflective({0, 0}));
  CHECK_FALSE(mask.reflective({1, 0}));
}

TEST_CASE("pbm parsing: comments, packed bits, all-zero mask") {
  const ObjectMask packed = parse_mask_pbm("P1\n# silhouette\n4 1\n1011\n");
  CHECK(packed.reflective_count() == 3);

  const ObjectMask zeros = parse_mask_pbm("P1\n4 4\n0000 0000 0000 0000\n");
  CHECK(zeros.reflective_count() == 0);
}

TEST_CASE("pbm parsing errors carry line and column") {
  CHECK_THROWS_AS(parse_mask_pbm("P5\n2 2\n0 0 0 0\n"), ImageFormatError);

  try {
    parse_mask_pbm("P1\n2 2\n0 0\n0 2\n", "bad.pbm");
    FAIL("expected a parse error");
  } catch (const ImageFormatError& e) {
    CHECK(e.line() == 4);
    CHECK(e.column() == 3);
    CHECK(std::string(e.what()).find("bad.pbm:4:3") != std::string::npos);
    CHECK(std::string(e.what()).find("0 or 1") != std::string::npos);
  }

  // dimension mismatches, both directions
  CHECK_THROWS_WITH_AS(parse_mask_pbm("P1\n2 2\n0 0 0\n"), doctest::Contains("found only 3"),
                       ImageFormatError);
  CHECK_THROWS_WITH_AS(parse_mask_pbm("P1\n2 2\n0 0 0 0 1\n"),
                       doctest::Contains("trailing data"), ImageFormatError);
}

TEST_CASE("mask write/load round trip is the identity") {
  StreamRng rng(31, 0);
  for (int i = 0; i < 25; ++i) {
    const ObjectMask mask = random_mask(rng);
    const ObjectMask back = parse_mask_pbm(mask_to_pbm(mask));
    CHECK(back == mask);
  }

  const auto path = temp_file("roundtrip.pbm");
  const ObjectMask mask = random_mask(rng);
  write_mask_pbm(mask, path);
  CHECK(load_mask(path) == mask);
  std::filesystem::remove(path);
}

TEST_CASE("load_mask propagates missing-file errors") {
  CHECK_THROWS_AS(load_mask("/nonexistent/definitely_missing.pbm"), std::runtime_error);
}

TEST_CASE("sample_position: floor rule and degenerate mask") {
  const ObjectMask one = ObjectMask::filled(1, 1, true);
  CHECK(sample_position(one, 0.0, 0.0) == PixelCoord{0, 0});
  CHECK(sample_position(one, 0.999999, 0.5) == PixelCoord{0, 0});

  const ObjectMask two = ObjectMask::filled(2, 2, true);
  CHECK(sample_position(two, 0.6, 0.1) == PixelCoord{1, 0});
}

TEST_CASE("sample_position is uniform: joint and marginal chi-squared") {
  const ObjectMask mask = ObjectMask::filled(4, 4, true);
  StreamRng rng(77, 0);
  const int n = 100000;
  std::vector<std::uint64_t> cells(16, 0);
  std::vector<std::uint64_t> rows(4, 0), cols(4, 0);
  for (int i = 0; i < n; ++i) {
    const PixelCoord p = sample_position(mask, rng.next_unit(), rng.next_unit());
    ++cells[static_cast<std::size_t>(p.y) * 4 + p.x];
    ++rows[static_cast<std::size_t>(p.y)];
    ++cols[static_cast<std::size_t>(p.x)];
  }
  CHECK(oracle::chi_squared_uniform(cells, n) < oracle::kChi2Crit999Df15);
  CHECK(oracle::chi_squared_uniform(rows, n) < oracle::kChi2Crit999Df3);
  CHECK(oracle::chi_squared_uniform(cols, n) < oracle::kChi2Crit999Df3);
}

TEST_CASE("reflect: bit decides, bounds enforced") {
  const ObjectMask mask = parse_mask_pbm("P1\n2 1\n1 0\n");
  CHECK(reflect(mask, {0, 0}) == Reflection::Reflected);
  CHECK(reflect(mask, {1, 0}) == Reflection::Absorbed);
  CHECK_THROWS_AS(reflect(mask, {2, 0}), std::out_of_range);
  CHECK_THROWS_AS(reflect(mask, {0, -1}), std::out_of_range);

  const ObjectMask all = ObjectMask::filled(8, 8, true);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) CHECK(reflect(all, {x, y}) == Reflection::Reflected);
  }
}

TEST_CASE("pgm writing: examples and degenerate maxval") {
  CountGrid one(1, 1);
  for (int i = 0; i < 5; ++i) one.add({0, 0});
  CHECK(grid_to_pgm(one) == "P2\n1 1\n5\n5\n");

  const CountGrid zeros(2, 2);
  CHECK(grid_to_pgm(zeros) == "P2\n2 2\n1\n0 0\n0 0\n");
}

TEST_CASE("pgm write/read round trip preserves counts exactly") {
  StreamRng rng(55, 0);
  CountGrid grid(5, 3);
  for (int i = 0; i < 200; ++i) {
    grid.add({static_cast<int>(rng.uniform_index(5)), static_cast<int>(rng.uniform_index(3))});
  }
  CHECK(parse_grid_pgm(grid_to_pgm(grid)) == grid);

  const auto path = temp_file("roundtrip.pgm");
  write_image_pgm(grid, path);
  CHECK(load_image_pgm(path) == grid);
  std::filesystem::remove(path);
}

TEST_CASE("count grid merge adds pixelwise") {
  CountGrid a(2, 1), b(2, 1);
  a.add({0, 0});
  b.add({0, 0});
  b.add({1, 0});
  a += b;
  CHECK(a.at(0, 0) == 2);
  CHECK(a.at(1, 0) == 1);
  CHECK(a.total() == 3);
  CHECK_THROWS_AS(a += CountGrid(3, 1), std::invalid_argument);
}

TEST_CASE("built-in masks: 64x64 with frozen silhouette areas") {
  const ObjectMask aircraft = builtin_aircraft_mask();
  CHECK(aircraft.width() == 64);
  CHECK(aircraft.height() == 64);
  CHECK(aircraft.reflective_count() == 1116);  // frozen bit count of the shipped asset

  const ObjectMask bird = builtin_bird_mask();
  CHECK(bird.width() == 64);
  CHECK(bird.height() == 64);
  CHECK(bird.reflective_count() == 840);  // frozen bit count of the shipped asset

  // regenerating gives identical masks (fixed vertex lists)
  CHECK(builtin_aircraft_mask() == aircraft);
  CHECK(builtin_mask("aircraft") == aircraft);
  CHECK(builtin_mask("bird") == bird);
  CHECK_THROWS_AS(builtin_mask("dragon"), std::invalid_argument);
}
