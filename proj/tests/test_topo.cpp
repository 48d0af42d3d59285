#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "helpers.hpp"
#include "strainflow/topo.hpp"

using namespace strainflow;

TEST_SUITE("topo") {

TEST_CASE("fill_invalid replaces holes with the valid minimum") {
  const std::vector<double> field{5.0, 2.0, 9.0, 7.0};
  const std::vector<std::uint8_t> valid{1, 0, 1, 0};
  const std::vector<double> out = fill_invalid(field, valid);
  CHECK(out == std::vector<double>{5.0, 5.0, 9.0, 5.0});
}

TEST_CASE("fill_invalid is the identity on fully valid fields") {
  const std::vector<double> field{1.0, -2.0, 3.5};
  CHECK(fill_invalid(field, {1, 1, 1}) == field);
}

TEST_CASE("fill_invalid never raises a sample above the valid maximum") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto field = testutil::random_field(64, rng, -1.0, 1.0);
    auto valid = testutil::random_mask(64, 0.7, rng);
    valid[0] = 1;  // keep at least one valid sample
    const auto out = fill_invalid(field, valid);
    double vmax = field[0];
    for (int i = 0; i < 64; ++i)
      if (valid[i]) vmax = std::max(vmax, field[i]);
    for (double v : out) CHECK(v <= vmax);
  }
}

TEST_CASE("fill_invalid rejects all-invalid frames") {
  CHECK_THROWS_AS(fill_invalid({1.0, 2.0}, {0, 0}), error);
}

TEST_CASE("h_maxima with h=0 is the identity") {
  std::mt19937_64 rng(5);
  const grid_spec grid{8, 6, 1.0};
  const auto field = testutil::random_field(grid.sample_count(), rng);
  CHECK(h_maxima(field, grid, 0.0) == field);
}

TEST_CASE("h_maxima lowers an isolated spike by exactly h") {
  const grid_spec grid{7, 7, 1.0};
  std::vector<double> field(grid.sample_count(), 0.0);
  field[grid.index(3, 3)] = 0.1;
  const auto out = h_maxima(field, grid, 0.05);
  for (int i = 0; i < grid.sample_count(); ++i)
    CHECK(out[i] == doctest::Approx(i == grid.index(3, 3) ? 0.05 : 0.0));
}

TEST_CASE("h_maxima keeps deep maxima distinct and erases shallow ones") {
  // two peaks over a zero plain: depth 0.3 and depth 0.04
  const grid_spec grid{11, 5, 1.0};
  std::vector<double> field(grid.sample_count(), 0.0);
  field[grid.index(2, 2)] = 0.3;
  field[grid.index(8, 2)] = 0.04;
  const auto out = h_maxima(field, grid, 0.0416666666666666664);
  CHECK(out[grid.index(2, 2)] > 0.2);  // survives, lowered by h
  CHECK(out[grid.index(8, 2)] == doctest::Approx(0.0));  // flattened away
}

TEST_CASE("h_maxima satisfies the sandwich and is antitone in h") {
  std::mt19937_64 rng(7);
  const grid_spec grid{32, 32, 1.0};
  for (int trial = 0; trial < 60; ++trial) {
    const auto field = testutil::random_field(grid.sample_count(), rng);
    std::vector<double> prev;
    for (int ih = 0; ih <= 3; ++ih) {
      double tau_unused, h;
      thresholds(1, ih, 1.0, tau_unused, h);
      const auto out = h_maxima(field, grid, h);
      for (int i = 0; i < grid.sample_count(); ++i) {
        CHECK(out[i] <= field[i] + 1e-15);
        CHECK(out[i] >= field[i] - h - 1e-15);
        if (!prev.empty()) CHECK(out[i] <= prev[i] + 1e-15);
      }
      prev = out;
    }
  }
}

TEST_CASE("h_maxima matches the naive fixpoint reconstruction oracle") {
  std::mt19937_64 rng(11);
  const grid_spec grid{12, 12, 1.0};
  for (int trial = 0; trial < 40; ++trial) {
    const auto field = testutil::random_field(grid.sample_count(), rng);
    for (double h : {0.03, 0.125}) {
      std::vector<double> marker(field.size());
      for (std::size_t i = 0; i < field.size(); ++i) marker[i] = field[i] - h;
      const auto want = testutil::reconstruct_fixpoint(marker, field, grid);
      const auto got = h_maxima(field, grid, h);
      for (std::size_t i = 0; i < field.size(); ++i) CHECK(got[i] == want[i]);
    }
  }
}

TEST_CASE("h_maxima rejects negative h") {
  CHECK_THROWS_AS(h_maxima({0.0, 0.0, 0.0, 0.0}, grid_spec{2, 2, 1.0}, -0.1),
                  error);
}

TEST_CASE("dataset p95 uses the nearest-rank rule") {
  std::vector<double> vals(20);
  for (int i = 0; i < 20; ++i) vals[i] = i + 1;  // 1..20
  // ceil(0.95 * 20) = 19 -> value 19
  CHECK(dataset_p95({vals}, {std::vector<std::uint8_t>(20, 1)}) == 19.0);

  // across frames, invalid samples excluded
  const std::vector<double> a{100.0, 1.0};
  const std::vector<double> b{2.0, 3.0};
  const double p =
      dataset_p95({a, b}, {{0, 1}, {1, 1}});  // samples {1,2,3}, rank 3
  CHECK(p == 3.0);

  CHECK(dataset_p95({{42.0}}, {{1}}) == 42.0);
  CHECK_THROWS_AS(dataset_p95({{1.0}}, {{0}}), error);
}

TEST_CASE("thresholds follow the tau and h grids") {
  double tau, h;
  thresholds(1, 0, 0.08, tau, h);
  CHECK(tau == doctest::Approx(0.02));
  CHECK(h == 0.0);
  thresholds(4, 3, 0.08, tau, h);
  CHECK(tau == doctest::Approx(0.08));
  CHECK(h == doctest::Approx(0.125));
  thresholds(2, 1, 1.0, tau, h);
  CHECK(tau == doctest::Approx(0.5));
  CHECK(h == doctest::Approx(0.125 / 3.0));
  CHECK_THROWS_AS(thresholds(0, 0, 1.0, tau, h), error);
  CHECK_THROWS_AS(thresholds(5, 0, 1.0, tau, h), error);
  CHECK_THROWS_AS(thresholds(1, -1, 1.0, tau, h), error);
  CHECK_THROWS_AS(thresholds(1, 4, 1.0, tau, h), error);
}

TEST_CASE("superlevel components join diagonal neighbors") {
  const grid_spec grid{4, 4, 1.0};
  std::vector<double> field(grid.sample_count(), 0.0);
  field[grid.index(0, 0)] = 1.0;
  field[grid.index(1, 1)] = 1.0;  // diagonal touch -> one component
  field[grid.index(3, 3)] = 1.0;  // separate
  const auto regions = superlevel_components(field, grid, 0.5, 2, 10);
  REQUIRE(regions.size() == 2);
  CHECK(regions[0].id == 10);
  CHECK(regions[1].id == 11);
  CHECK(regions[0].area == 2);
  CHECK(regions[0].frame_index == 2);
  CHECK(regions[0].samples ==
        std::vector<coord>{{0, 0}, {1, 1}});
  CHECK(regions[0].xmin == 0);
  CHECK(regions[0].xmax == 1);
  CHECK(regions[1].samples == std::vector<coord>{{3, 3}});
  CHECK(regions[0].max_evm == 1.0);
}

TEST_CASE("superlevel components use a non-strict threshold") {
  const grid_spec grid{2, 2, 1.0};
  const std::vector<double> field{0.5, 0.4999999, 0.5, 0.2};
  const auto regions = superlevel_components(field, grid, 0.5, 0);
  REQUIRE(regions.size() == 1);
  CHECK(regions[0].area == 2);
}

TEST_CASE("field everywhere below tau yields no regions") {
  const grid_spec grid{3, 3, 1.0};
  CHECK(superlevel_components(std::vector<double>(9, 0.1), grid, 0.2, 0)
            .empty());
}

TEST_CASE("components partition the mask like a union-find oracle") {
  std::mt19937_64 rng(13);
  const grid_spec grid{16, 16, 1.0};
  for (int trial = 0; trial < 200; ++trial) {
    const auto mask = testutil::random_mask(grid.sample_count(), 0.45, rng);
    std::vector<double> field(grid.sample_count(), 0.0);
    for (int i = 0; i < grid.sample_count(); ++i) field[i] = mask[i];
    const auto regions = superlevel_components(field, grid, 1.0, 0);

    const auto oracle = testutil::union_find_components(mask, grid);
    // same sample partition: map production region id <-> oracle root
    std::map<int, int> region_to_root;
    std::map<int, int> root_to_region;
    int covered = 0;
    for (const region& r : regions) {
      for (const coord& c : r.samples) {
        const int root = oracle[grid.index(c.x, c.y)];
        REQUIRE(root >= 0);
        auto [it, fresh] = region_to_root.try_emplace(r.id, root);
        CHECK(it->second == root);
        auto [jt, fresh2] = root_to_region.try_emplace(root, r.id);
        CHECK(jt->second == r.id);
        ++covered;
      }
    }
    int mask_count = 0;
    for (auto m : mask) mask_count += m;
    CHECK(covered == mask_count);
  }
}

TEST_CASE("region ids follow raster order of first contact") {
  const grid_spec grid{5, 3, 1.0};
  std::vector<double> field(grid.sample_count(), 0.0);
  //  . . B . C
  //  A . B . .
  //  A . . . .
  field[grid.index(0, 1)] = 1.0;
  field[grid.index(0, 2)] = 1.0;
  field[grid.index(2, 0)] = 1.0;
  field[grid.index(2, 1)] = 1.0;
  field[grid.index(4, 0)] = 1.0;
  const auto regions = superlevel_components(field, grid, 0.5, 0);
  REQUIRE(regions.size() == 3);
  CHECK(regions[0].samples.front() == coord{2, 0});  // first in raster scan
  CHECK(regions[1].samples.front() == coord{4, 0});
  CHECK(regions[2].samples.front() == coord{0, 1});
}

TEST_CASE("superlevel sets nest across the four tau values") {
  std::mt19937_64 rng(17);
  const grid_spec grid{24, 24, 1.0};
  for (int trial = 0; trial < 50; ++trial) {
    const auto field = testutil::random_field(grid.sample_count(), rng);
    const double p95 = dataset_p95(
        {field}, {std::vector<std::uint8_t>(field.size(), 1)});
    std::vector<std::vector<region>> by_it;
    for (int it = 1; it <= 4; ++it) {
      double tau, h;
      thresholds(it, 0, p95, tau, h);
      by_it.push_back(superlevel_components(field, grid, tau, 0));
    }
    for (int it = 1; it < 4; ++it) {
      // label grid of the coarser (smaller tau) level
      std::vector<int> label(grid.sample_count(), -1);
      for (const region& r : by_it[it - 1])
        for (const coord& c : r.samples) label[grid.index(c.x, c.y)] = r.id;
      for (const region& r : by_it[it]) {
        std::set<int> parents;
        for (const coord& c : r.samples) {
          REQUIRE(label[grid.index(c.x, c.y)] >= 0);
          parents.insert(label[grid.index(c.x, c.y)]);
        }
        CHECK(parents.size() == 1);  // contained in exactly one region
      }
    }
  }
}

TEST_CASE("regions jsonl emits one line per region") {
  const grid_spec grid{4, 2, 1.0};
  std::vector<double> field(grid.sample_count(), 0.0);
  field[grid.index(0, 0)] = 1.0;
  field[grid.index(3, 1)] = 2.0;
  const auto regions = superlevel_components(field, grid, 0.5, 3);
  const std::string jsonl = regions_jsonl(regions);
  CHECK(std::count(jsonl.begin(), jsonl.end(), '\n') == 2);
  CHECK(jsonl.find("\"frame\":3") != std::string::npos);
}

}  // TEST_SUITE
