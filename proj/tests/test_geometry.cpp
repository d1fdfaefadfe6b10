#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "ralmac/errors.hpp"
#include "ralmac/geometry.hpp"
#include "ralmac/lesion.hpp"
#include "support.hpp"

using namespace ralmac;

namespace {

void check_point(const Point3& p, double x, double y, double z, double tol = 1e-12) {
  CHECK(std::abs(p.x - x) <= tol);
  CHECK(std::abs(p.y - y) <= tol);
  CHECK(std::abs(p.z - z) <= tol);
}

}  // namespace

TEST_CASE("voxel_to_physical is origin plus index times spacing") {
  const Grid g{{4, 4, 4}, {2, 2, 2}, {0, 0, 0}};
  check_point(voxel_to_physical(g, {1, 1, 1}), 2, 2, 2);
  check_point(voxel_to_physical(g, {0, 0, 0}), 0, 0, 0);

  const Grid h{{8, 8, 8}, {0.5, 0.5, 1.0}, {10, -5, 0}};
  check_point(voxel_to_physical(h, {2, 2, 3}), 11, -4, 3);
}

TEST_CASE("physical_to_voxel inverts voxel_to_physical") {
  const Grid g{{4, 4, 4}, {2, 2, 2}, {1, 1, 1}};
  const Index3 idx = physical_to_voxel(g, {5, 3, 1});
  CHECK(std::abs(idx.i - 2) < 1e-12);
  CHECK(std::abs(idx.j - 1) < 1e-12);
  CHECK(std::abs(idx.k - 0) < 1e-12);

  const Index3 o = physical_to_voxel(g, g.origin);
  CHECK(o == Index3{0, 0, 0});

  const Index3 start{3.5, 0, -2};
  const Index3 back = physical_to_voxel(g, voxel_to_physical(g, start));
  CHECK(std::abs(back.i - start.i) < 1e-9);
  CHECK(std::abs(back.j - start.j) < 1e-9);
  CHECK(std::abs(back.k - start.k) < 1e-9);
}

TEST_CASE("voxel round trip holds for random fractional indices and grids") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const Grid g{{5, 6, 7},
                 {testing::uniform(rng, 0.3, 3), testing::uniform(rng, 0.3, 3), testing::uniform(rng, 0.3, 3)},
                 {testing::uniform(rng, -100, 100), testing::uniform(rng, -100, 100), testing::uniform(rng, -100, 100)}};
    for (int n = 0; n < 100; ++n) {
      const Index3 idx{testing::uniform(rng, -10, 20), testing::uniform(rng, -10, 20), testing::uniform(rng, -10, 20)};
      const Index3 back = physical_to_voxel(g, voxel_to_physical(g, idx));
      REQUIRE(std::abs(back.i - idx.i) < 1e-9);
      REQUIRE(std::abs(back.j - idx.j) < 1e-9);
      REQUIRE(std::abs(back.k - idx.k) < 1e-9);
    }
  }
}

TEST_CASE("Volume enforces its invariants") {
  CHECK_THROWS_AS(Volume(Grid{{0, 4, 4}, {1, 1, 1}, {}}), SpecError);
  CHECK_THROWS_AS(Volume(Grid{{4, 4, 4}, {1, 0, 1}, {}}), SpecError);
  CHECK_THROWS_AS(Volume(Grid{{4, 4, 4}, {1, -2, 1}, {}}), SpecError);
  CHECK_THROWS_AS(Volume(Grid{{2, 2, 2}, {1, 1, 1}, {}}, std::vector<double>(7, 0.0)), SizeError);
  std::vector<double> bad(8, 0.0);
  bad[3] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(Volume(Grid{{2, 2, 2}, {1, 1, 1}, {}}, bad), DataError);
  bad[3] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(Volume(Grid{{2, 2, 2}, {1, 1, 1}, {}}, bad), DataError);
}

TEST_CASE("voxels are stored x-fastest") {
  Volume v(Grid{{3, 2, 2}, {1, 1, 1}, {}});
  v.at(2, 1, 1) = 7.0;
  CHECK(v.voxels()[2 + 3 * 1 + 6 * 1] == 7.0);
}

TEST_CASE("trilinear interpolation reproduces voxel values and linear ramps") {
  const Grid g{{4, 5, 6}, {1.5, 2, 0.5}, {-3, 1, 2}};
  Volume v(g);
  for (std::size_t k = 0; k < 6; ++k)
    for (std::size_t j = 0; j < 5; ++j)
      for (std::size_t i = 0; i < 4; ++i) v.at(i, j, k) = 2.0 * double(i) - 3.0 * double(j) + 0.5 * double(k) + 1.0;

  for (std::size_t k = 0; k < 6; ++k)
    for (std::size_t j = 0; j < 5; ++j)
      for (std::size_t i = 0; i < 4; ++i)
        CHECK(v.sample(voxel_to_physical(g, {double(i), double(j), double(k)})) == v.at(i, j, k));

  // A linear function is reproduced exactly (to rounding) by trilinear interpolation.
  std::mt19937_64 rng(5);
  for (int n = 0; n < 200; ++n) {
    const Index3 idx{testing::uniform(rng, 0, 3), testing::uniform(rng, 0, 4), testing::uniform(rng, 0, 5)};
    const double expected = 2.0 * idx.i - 3.0 * idx.j + 0.5 * idx.k + 1.0;
    CHECK(std::abs(v.interpolate(idx) - expected) < 1e-9);
  }
  CHECK(v.interpolate({-0.5, 1, 1}, -42.0) == -42.0);
  CHECK(v.interpolate({1, 1, 5.2}, -42.0) == -42.0);
}

TEST_CASE("lesion classes parse loosely and print canonically") {
  CHECK(parse_lesion_class("target") == LesionClass::Target);
  CHECK(parse_lesion_class("T") == LesionClass::Target);
  CHECK(parse_lesion_class("Non-Target") == LesionClass::NonTarget);
  CHECK(parse_lesion_class("nontarget") == LesionClass::NonTarget);
  CHECK(parse_lesion_class("NT") == LesionClass::NonTarget);
  CHECK_FALSE(parse_lesion_class("lymph").has_value());
  CHECK(to_string(LesionClass::Target) == "target");
  CHECK(to_string(LesionClass::NonTarget) == "non-target");
}

TEST_CASE("canonical names follow G<k> / NG<k>") {
  CHECK(canonical_name(LesionClass::Target, 3) == "G3");
  CHECK(canonical_name(LesionClass::NonTarget, 12) == "NG12");
  CHECK(parse_canonical_name("G1") == std::pair{LesionClass::Target, 1});
  CHECK(parse_canonical_name("NG7") == std::pair{LesionClass::NonTarget, 7});
  CHECK_FALSE(parse_canonical_name("G0").has_value());
  CHECK_FALSE(parse_canonical_name("NG").has_value());
  CHECK_FALSE(parse_canonical_name("T1").has_value());
  CHECK_FALSE(parse_canonical_name("G1a").has_value());
}

TEST_CASE("reference centroid is the mean of mapped centroids") {
  LesionTrack t;
  t.observations.push_back({testing::lesion("Screening", "S1", "R1", "T1", {0, 0, 0}), {0, 0, 0}});
  t.observations.push_back({testing::lesion("Screening", "S1", "R2", "T1", {9, 9, 9}), {2, 4, 6}});
  t.observations.push_back({testing::lesion("Week8", "S1", "R1", "T1", {9, 9, 9}), {4, 2, 0}});
  t.refresh_reference_centroid();
  CHECK(t.reference_centroid == Point3{2, 2, 2});
}

TEST_CASE("naming order is timepoint, series, reader, label") {
  const auto a = testing::lesion("Screening", "S1", "R2", "T1", {});
  const auto b = testing::lesion("Screening", "S2", "R1", "T1", {});
  const auto c = testing::lesion("Screening", "S1", "R2", "T2", {});
  CHECK(naming_order_less(a, b));
  CHECK(naming_order_less(a, c));
  CHECK_FALSE(naming_order_less(b, a));
}
