#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <queue>
#include <random>

#include "ralmac/errors.hpp"
#include "ralmac/mask.hpp"
#include "ralmac/registration.hpp"
#include "ralmac/synth.hpp"
#include "support.hpp"

using namespace ralmac;

namespace {

// Flood-fill oracle: sizes of all 6-connected components of voxels >= threshold.
std::vector<std::size_t> component_sizes(const Volume& v, double threshold) {
  const auto& d = v.dims();
  std::vector<int> label(v.size(), 0);
  std::vector<std::size_t> sizes;
  for (std::size_t k = 0; k < d.nz; ++k)
    for (std::size_t j = 0; j < d.ny; ++j)
      for (std::size_t i = 0; i < d.nx; ++i) {
        const std::size_t start = v.grid().linear(i, j, k);
        if (label[start] || v.voxels()[start] < threshold) continue;
        sizes.push_back(0);
        std::queue<std::array<long, 3>> q;
        q.push({long(i), long(j), long(k)});
        label[start] = int(sizes.size());
        while (!q.empty()) {
          const auto [x, y, z] = q.front();
          q.pop();
          ++sizes.back();
          const long nb[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
          for (const auto& o : nb) {
            const long a = x + o[0], b = y + o[1], c = z + o[2];
            if (a < 0 || b < 0 || c < 0 || a >= long(d.nx) || b >= long(d.ny) || c >= long(d.nz)) continue;
            const std::size_t idx = v.grid().linear(std::size_t(a), std::size_t(b), std::size_t(c));
            if (label[idx] || v.voxels()[idx] < threshold) continue;
            label[idx] = int(sizes.size());
            q.push({a, b, c});
          }
        }
      }
  return sizes;
}

Volume blank(std::size_t n, double value) {
  Volume v(Grid{{n, n, n}, {1, 1, 1}, {}});
  std::fill(v.voxels().begin(), v.voxels().end(), value);
  return v;
}

BinaryMask body_mask(const Point3& center, const Point3& semi_axes) {
  PhantomSpec spec;
  spec.body_center = center;
  spec.body_semi_axes = semi_axes;
  spec.noise_sigma = 0;
  return preprocess_mask(generate_phantom(spec).volume, -300);
}

}  // namespace

TEST_CASE("uniform volume above the threshold is one full component") {
  const auto m = preprocess_mask(blank(6, 10.0), -300);
  CHECK(m.count() == 216);
}

TEST_CASE("only the larger of two blobs survives") {
  Volume v = blank(20, -1000);
  // 100-voxel block (5x5x4) and 20-voxel block (5x2x2), well separated.
  for (std::size_t k = 1; k < 5; ++k)
    for (std::size_t j = 1; j < 6; ++j)
      for (std::size_t i = 1; i < 6; ++i) v.at(i, j, k) = 0;
  for (std::size_t k = 12; k < 14; ++k)
    for (std::size_t j = 12; j < 14; ++j)
      for (std::size_t i = 12; i < 17; ++i) v.at(i, j, k) = 0;
  auto sizes = component_sizes(v, -300);
  std::sort(sizes.begin(), sizes.end());
  REQUIRE(sizes == std::vector<std::size_t>{20, 100});

  const auto m = preprocess_mask(v, -300);
  CHECK(m.count() == 100);
  CHECK(m.voxels[v.grid().linear(3, 3, 3)] == 1);
  CHECK(m.voxels[v.grid().linear(13, 13, 13)] == 0);
}

TEST_CASE("all air is an empty mask") {
  CHECK_THROWS_AS(preprocess_mask(blank(5, -1000), -300), EmptyMask);
}

TEST_CASE("threshold is inclusive") {
  CHECK(preprocess_mask(blank(3, -300), -300).count() == 27);
}

TEST_CASE("largest component matches the flood-fill oracle on random volumes") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    Volume v(Grid{{9, 8, 7}, {1, 1, 1}, {}});
    for (auto& x : v.voxels()) x = (rng() % 100) < 45 ? 0.0 : -1000.0;
    const auto sizes = component_sizes(v, -300);
    if (sizes.empty()) continue;
    const auto m = largest_component(threshold_mask(v, -300));
    CHECK(m.count() == *std::max_element(sizes.begin(), sizes.end()));
    // The survivor is connected: the oracle finds exactly one component in it.
    Volume kept(v.grid());
    for (std::size_t i = 0; i < kept.size(); ++i) kept.voxels()[i] = m.voxels[i] ? 1.0 : 0.0;
    CHECK(component_sizes(kept, 0.5).size() == 1);
  }
}

TEST_CASE("diagonal neighbours are not connected") {
  Volume v = blank(4, -1000);
  v.at(0, 0, 0) = 0;
  v.at(1, 1, 0) = 0;
  v.at(2, 2, 2) = 0;
  v.at(2, 2, 3) = 0;
  CHECK(preprocess_mask(v, -300).count() == 2);
}

TEST_CASE("moments of a box") {
  BinaryMask m(Grid{{10, 10, 10}, {2, 1, 1}, {5, 0, 0}});
  for (std::size_t k = 2; k < 5; ++k)
    for (std::size_t j = 0; j < 1; ++j)
      for (std::size_t i = 0; i < 1; ++i) m.voxels[m.grid.linear(i, j, k)] = 1;
  const auto mo = mask_moments(m);
  CHECK(mo.count == 3);
  CHECK(mo.centroid == Point3{5, 0, 3});
  CHECK(std::abs(mo.covariance[2][2] - 2.0 / 3.0) < 1e-12);
  CHECK(mo.covariance[0][0] == 0.0);
  CHECK(mask_radius(m) == doctest::Approx(1.0));
}

TEST_CASE("dice of identical and disjoint masks") {
  BinaryMask a(Grid{{4, 4, 4}, {1, 1, 1}, {}}), b(a.grid);
  a.voxels[0] = a.voxels[1] = 1;
  b.voxels[1] = b.voxels[2] = 1;
  CHECK(dice(a, a) == 1.0);
  CHECK(dice(a, b) == 0.5);
  BinaryMask c(a.grid);
  c.voxels[9] = 1;
  CHECK(dice(a, c) == 0.0);
}

TEST_CASE("identical masks initialize to the identity") {
  const auto m = body_mask({63, 63, 63}, {40, 30, 22});
  bool used_pa = false;
  const auto t = initialize_transform(m, m, &used_pa);
  CHECK(used_pa);
  CHECK(std::abs(t.angles.a1) < 1e-6);
  CHECK(std::abs(t.angles.a2) < 1e-6);
  CHECK(std::abs(t.angles.a3) < 1e-6);
  CHECK(norm(t.translation) < 1e-6);
}

TEST_CASE("a shifted ellipsoid initializes to the shift") {
  const auto fixed = body_mask({63, 63, 63}, {40, 30, 22});
  const auto moving = body_mask({73, 58, 66}, {40, 30, 22});
  const auto t = initialize_transform(fixed, moving);
  CHECK(std::abs(t.translation.x - 10) <= 1.0);
  CHECK(std::abs(t.translation.y + 5) <= 1.0);
  CHECK(std::abs(t.translation.z - 3) <= 1.0);
  CHECK(std::abs(t.angles.a1) < 1e-3);
  CHECK(std::abs(t.angles.a2) < 1e-3);
  CHECK(std::abs(t.angles.a3) < 1e-3);
  // Fixed centroid maps onto moving centroid.
  CHECK(distance(apply_transform(t, mask_moments(fixed).centroid), mask_moments(moving).centroid) < 1e-9);
}

TEST_CASE("a rotated ellipsoid initializes to the rotation") {
  PhantomSpec spec;
  spec.noise_sigma = 0;
  const auto phantom = generate_phantom(spec);
  RigidTransform truth;
  truth.angles = {0.12, -0.08, 0.15};
  truth.translation = {4, -3, 2};
  truth.center = spec.body_center;
  const auto moved = transform_phantom(phantom.volume, phantom.truth, truth, spec.grid);
  const auto fixed_mask = preprocess_mask(phantom.volume, -300);
  const auto moving_mask = preprocess_mask(moved.volume, -300);
  const auto t = initialize_transform(fixed_mask, moving_mask);
  // moving(x) = fixed(truth(x)), so the fixed->moving point map is truth^-1.
  const auto expected = invert_transform(truth);
  for (const Point3 p : {Point3{30, 60, 60}, Point3{90, 70, 50}, Point3{63, 40, 80}}) {
    CHECK(distance(apply_transform(t, p), apply_transform(expected, p)) < 2.0);
  }
}

TEST_CASE("spheres fall back to centroid-only initialization") {
  const auto fixed = body_mask({63, 63, 63}, {25, 25, 25});
  const auto moving = body_mask({60, 66, 63}, {25, 25, 25});
  bool used_pa = true;
  const auto t = initialize_transform(fixed, moving, &used_pa);
  CHECK_FALSE(used_pa);
  CHECK(t.angles == EulerAngles{});
  CHECK(std::abs(t.translation.x + 3) < 0.5);
  CHECK(std::abs(t.translation.y - 3) < 0.5);
}

TEST_CASE("box dilation matches the brute-force neighbourhood") {
  std::mt19937_64 rng(12);
  const Grid g{{9, 7, 6}, {1.0, 2.0, 3.0}, {}};
  for (int trial = 0; trial < 20; ++trial) {
    BinaryMask m(g);
    for (auto& v : m.voxels) v = (rng() % 100) < 4;
    const double r = testing::uniform(rng, 0, 5);
    const auto out = dilate(m, r);
    for (long k = 0; k < 6; ++k)
      for (long j = 0; j < 7; ++j)
        for (long i = 0; i < 9; ++i) {
          bool expected = false;
          for (long c = 0; c < 6; ++c)
            for (long b = 0; b < 7; ++b)
              for (long a = 0; a < 9; ++a)
                if (m.voxels[g.linear(a, b, c)] && std::abs(a - i) * 1.0 <= r && std::abs(b - j) * 2.0 <= r &&
                    std::abs(c - k) * 3.0 <= r)
                  expected = true;
          REQUIRE(bool(out.voxels[g.linear(i, j, k)]) == expected);
        }
  }
  CHECK_THROWS_AS(dilate(BinaryMask(g), -1.0), SpecError);
}
