#include "ralmac/mutual_information.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "ralmac/errors.hpp"

namespace ralmac {

namespace {

constexpr int kPadding = 2;

}  // namespace

double cubic_bspline(double x) {
  const double a = std::abs(x);
  if (a < 1.0) return (4.0 - 6.0 * a * a + 3.0 * a * a * a) / 6.0;
  if (a < 2.0) {
    const double b = 2.0 - a;
    return b * b * b / 6.0;
  }
  return 0.0;
}

MattesMutualInformation::MattesMutualInformation(const Volume& fixed, const Volume& moving, int bins,
                                                 double sample_fraction, std::uint64_t rng_seed,
                                                 std::uint64_t level_seed, const BinaryMask* sample_region)
    : moving_(moving), bins_(bins) {
  if (bins < 2 * kPadding + 1) throw SpecError("histogram needs at least 5 bins");
  if (!(sample_fraction > 0.0) || sample_fraction > 1.0) throw SpecError("sample fraction must be in (0, 1]");
  const auto [fmin, fmax] = fixed.intensity_range();
  const auto [mmin, mmax] = moving.intensity_range();
  if (!(fmax > fmin)) throw InsufficientRange("fixed image has zero intensity range");
  if (!(mmax > mmin)) throw InsufficientRange("moving image has zero intensity range");

  const double fixed_bin_size = (fmax - fmin) / double(bins - 2 * kPadding);
  const double fixed_normalized_min = fmin / fixed_bin_size - kPadding;
  moving_bin_size_ = (mmax - mmin) / double(bins - 2 * kPadding);
  moving_normalized_min_ = mmin / moving_bin_size_ - kPadding;

  moving_values_.assign(moving.voxels().begin(), moving.voxels().end());

  const std::size_t n = fixed.size();
  const auto count = static_cast<std::size_t>(std::floor(sample_fraction * double(n)));
  std::seed_seq seq{static_cast<std::uint32_t>(rng_seed), static_cast<std::uint32_t>(rng_seed >> 32),
                    static_cast<std::uint32_t>(level_seed), static_cast<std::uint32_t>(level_seed >> 32)};
  std::mt19937_64 rng(seq);
  sample_points_.reserve(count);
  fixed_bins_.reserve(count);
  const auto& d = fixed.dims();
  std::vector<std::size_t> region;
  if (sample_region) {
    if (!(sample_region->grid == fixed.grid())) throw SizeError("sample region and fixed volume geometry differ");
    for (std::size_t v = 0; v < n; ++v) {
      if (sample_region->voxels[v]) region.push_back(v);
    }
    if (region.empty()) throw EmptyMask("sample region is empty");
  }
  std::vector<std::size_t> drawn(count);
  for (auto& v : drawn) v = region.empty() ? static_cast<std::size_t>(rng() % n) : region[rng() % region.size()];
  // Memory order; the histogram does not depend on sample order.
  std::sort(drawn.begin(), drawn.end());
  // Each sample is jittered uniformly inside its voxel cell so that samples do
  // not sit on grid nodes; grid-aligned samples make identical grids prefer
  // slightly-off transforms (interpolation blur lowers the joint entropy).
  std::uniform_real_distribution<double> jitter(-0.5, 0.5);
  const auto inside = [](double c, std::size_t n) { return std::clamp(c, 0.0, double(n - 1)); };
  for (const std::size_t v : drawn) {
    const std::size_t i = v % d.nx, j = (v / d.nx) % d.ny, k = v / (d.nx * d.ny);
    Index3 idx{double(i) + jitter(rng), double(j) + jitter(rng), double(k) + jitter(rng)};
    sample_points_.push_back(voxel_to_physical(fixed.grid(), idx));
    idx = {inside(idx.i, d.nx), inside(idx.j, d.ny), inside(idx.k, d.nz)};
    const int bin = static_cast<int>(std::floor(fixed.interpolate(idx) / fixed_bin_size - fixed_normalized_min));
    fixed_bins_.push_back(std::clamp(bin, kPadding, bins - kPadding - 1));
  }
}

double MattesMutualInformation::evaluate(const RigidTransform& t) const {
  // Fold the rigid map and the moving grid into one affine map from fixed
  // physical points to moving continuous indices.
  const Matrix3 r = t.rotation();
  const Grid& g = moving_.grid();
  const Point3 offset = t.center + t.translation - multiply(r, t.center) - g.origin;
  Matrix3 a{};
  Point3 b;
  for (std::size_t row = 0; row < 3; ++row) {
    for (std::size_t col = 0; col < 3; ++col) a[row][col] = r[row][col] / g.spacing[row];
    b[row] = offset[row] / g.spacing[row];
  }

  const auto& d = g.dims;
  const double lim_x = double(d.nx - 1), lim_y = double(d.ny - 1), lim_z = double(d.nz - 1);
  const std::size_t sy = d.nx, sz = d.nx * d.ny;
  const float* vox = moving_values_.data();
  const int nb = bins_;
  const double inv_bin = 1.0 / moving_bin_size_;

  std::vector<double> joint(static_cast<std::size_t>(nb) * nb, 0.0);
  std::size_t valid = 0;
  for (std::size_t s = 0; s < sample_points_.size(); ++s) {
    const Point3& p = sample_points_[s];
    double x = a[0][0] * p.x + a[0][1] * p.y + a[0][2] * p.z + b.x;
    double y = a[1][0] * p.x + a[1][1] * p.y + a[1][2] * p.z + b.y;
    double z = a[2][0] * p.x + a[2][1] * p.y + a[2][2] * p.z + b.z;
    // Inside means inside some voxel cell; the outer half-cell takes the edge value.
    if (!(x >= -0.5 && y >= -0.5 && z >= -0.5 && x <= lim_x + 0.5 && y <= lim_y + 0.5 && z <= lim_z + 0.5)) continue;
    x = std::clamp(x, 0.0, lim_x);
    y = std::clamp(y, 0.0, lim_y);
    z = std::clamp(z, 0.0, lim_z);

    const std::size_t i0 = d.nx > 1 ? std::min(static_cast<std::size_t>(x), d.nx - 2) : 0;
    const std::size_t j0 = d.ny > 1 ? std::min(static_cast<std::size_t>(y), d.ny - 2) : 0;
    const std::size_t k0 = d.nz > 1 ? std::min(static_cast<std::size_t>(z), d.nz - 2) : 0;
    const double fx = x - double(i0), fy = y - double(j0), fz = z - double(k0);
    const std::size_t dx = d.nx > 1 ? 1 : 0, dy = d.ny > 1 ? sy : 0, dz = d.nz > 1 ? sz : 0;
    const float* c = vox + i0 + sy * j0 + sz * k0;
    const double c00 = c[0] + fx * (double(c[dx]) - c[0]);
    const double c10 = c[dy] + fx * (double(c[dy + dx]) - c[dy]);
    const double c01 = c[dz] + fx * (double(c[dz + dx]) - c[dz]);
    const double c11 = c[dz + dy] + fx * (double(c[dz + dy + dx]) - c[dz + dy]);
    const double c0 = c00 + fy * (c10 - c00);
    const double c1 = c01 + fy * (c11 - c01);
    const double value = c0 + fz * (c1 - c0);

    const double pos = value * inv_bin - moving_normalized_min_;
    const int center = std::clamp(static_cast<int>(pos), kPadding, nb - kPadding - 1);  // pos >= kPadding
    double* row = joint.data() + static_cast<std::size_t>(fixed_bins_[s]) * nb + (center - 1);
    // cubic_bspline(m - pos) for m = center-1 .. center+2
    const double u = pos - double(center), u2 = u * u, u3 = u2 * u;
    row[0] += (1.0 - 3.0 * u + 3.0 * u2 - u3) / 6.0;
    row[1] += (4.0 - 6.0 * u2 + 3.0 * u3) / 6.0;
    row[2] += (1.0 + 3.0 * u + 3.0 * u2 - 3.0 * u3) / 6.0;
    row[3] += u3 / 6.0;
    ++valid;
  }
  if (valid < kMinValidSamples) {
    throw InsufficientOverlap("only " + std::to_string(valid) + " samples map inside the moving volume");
  }

  double total = 0.0;
  for (double v : joint) total += v;
  std::vector<double> pf(nb, 0.0), pm(nb, 0.0);
  for (int f = 0; f < nb; ++f) {
    for (int m = 0; m < nb; ++m) {
      const double p = joint[std::size_t(f) * nb + m] / total;
      pf[f] += p;
      pm[m] += p;
    }
  }
  double mi = 0.0;
  for (int f = 0; f < nb; ++f) {
    for (int m = 0; m < nb; ++m) {
      const double p = joint[std::size_t(f) * nb + m] / total;
      if (p > 0.0) mi += p * std::log(p / (pf[f] * pm[m]));
    }
  }
  return -mi;
}

double mattes_mi(const Volume& fixed, const Volume& moving, const RigidTransform& t, int bins,
                 double sample_fraction, std::uint64_t rng_seed, std::uint64_t level_seed,
                 const BinaryMask* sample_region) {
  return MattesMutualInformation(fixed, moving, bins, sample_fraction, rng_seed, level_seed, sample_region)
      .evaluate(t);
}

}  // namespace ralmac
