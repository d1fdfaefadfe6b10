#include "ralmac/mask.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ralmac/errors.hpp"

namespace ralmac {

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(voxels.begin(), voxels.end(), std::uint8_t{1}));
}

BinaryMask threshold_mask(const Volume& v, double threshold) {
  BinaryMask m(v.grid());
  const auto vox = v.voxels();
  for (std::size_t i = 0; i < vox.size(); ++i) m.voxels[i] = vox[i] >= threshold ? 1 : 0;
  return m;
}

BinaryMask largest_component(const BinaryMask& m) {
  const auto& d = m.grid.dims;
  const std::size_t n = d.count();
  std::vector<std::int32_t> label(n, 0);
  std::vector<std::size_t> sizes{0};
  std::vector<std::size_t> stack;
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (!m.voxels[seed] || label[seed]) continue;
    const auto id = static_cast<std::int32_t>(sizes.size());
    std::size_t size = 0;
    stack.push_back(seed);
    label[seed] = id;
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      ++size;
      const std::size_t i = v % d.nx;
      const std::size_t j = (v / d.nx) % d.ny;
      const std::size_t k = v / (d.nx * d.ny);
      const auto visit = [&](std::size_t w) {
        if (m.voxels[w] && !label[w]) {
          label[w] = id;
          stack.push_back(w);
        }
      };
      if (i > 0) visit(v - 1);
      if (i + 1 < d.nx) visit(v + 1);
      if (j > 0) visit(v - d.nx);
      if (j + 1 < d.ny) visit(v + d.nx);
      if (k > 0) visit(v - d.nx * d.ny);
      if (k + 1 < d.nz) visit(v + d.nx * d.ny);
    }
    sizes.push_back(size);
  }
  BinaryMask out(m.grid);
  if (sizes.size() == 1) return out;
  const auto best = static_cast<std::int32_t>(std::max_element(sizes.begin() + 1, sizes.end()) - sizes.begin());
  for (std::size_t v = 0; v < n; ++v) out.voxels[v] = label[v] == best ? 1 : 0;
  return out;
}

BinaryMask preprocess_mask(const Volume& v, double body_threshold) {
  BinaryMask m = largest_component(threshold_mask(v, body_threshold));
  if (m.empty()) throw EmptyMask("no voxel reaches the body threshold");
  return m;
}

MaskMoments mask_moments(const BinaryMask& m) {
  MaskMoments out;
  const auto& d = m.grid.dims;
  Point3 sum;
  for (std::size_t k = 0; k < d.nz; ++k) {
    for (std::size_t j = 0; j < d.ny; ++j) {
      for (std::size_t i = 0; i < d.nx; ++i) {
        if (!m.voxels[m.grid.linear(i, j, k)]) continue;
        sum = sum + voxel_to_physical(m.grid, {double(i), double(j), double(k)});
        ++out.count;
      }
    }
  }
  if (out.count == 0) return out;
  out.centroid = (1.0 / double(out.count)) * sum;
  for (std::size_t k = 0; k < d.nz; ++k) {
    for (std::size_t j = 0; j < d.ny; ++j) {
      for (std::size_t i = 0; i < d.nx; ++i) {
        if (!m.voxels[m.grid.linear(i, j, k)]) continue;
        const Point3 r = voxel_to_physical(m.grid, {double(i), double(j), double(k)}) - out.centroid;
        for (std::size_t a = 0; a < 3; ++a) {
          for (std::size_t b = 0; b < 3; ++b) out.covariance[a][b] += r[a] * r[b];
        }
      }
    }
  }
  for (auto& row : out.covariance) {
    for (auto& c : row) c /= double(out.count);
  }
  return out;
}

double mask_radius(const BinaryMask& m) {
  const MaskMoments mom = mask_moments(m);
  const auto& d = m.grid.dims;
  double r = 0.0;
  for (std::size_t k = 0; k < d.nz; ++k) {
    for (std::size_t j = 0; j < d.ny; ++j) {
      for (std::size_t i = 0; i < d.nx; ++i) {
        if (m.voxels[m.grid.linear(i, j, k)]) {
          r = std::max(r, distance(voxel_to_physical(m.grid, {double(i), double(j), double(k)}), mom.centroid));
        }
      }
    }
  }
  return r;
}

double dice(const BinaryMask& a, const BinaryMask& b) {
  if (!(a.grid.dims == b.grid.dims)) throw SizeError("dice requires masks on the same grid");
  std::size_t both = 0, na = 0, nb = 0;
  for (std::size_t v = 0; v < a.voxels.size(); ++v) {
    na += a.voxels[v];
    nb += b.voxels[v];
    both += a.voxels[v] & b.voxels[v];
  }
  if (na + nb == 0) return 1.0;
  return 2.0 * double(both) / double(na + nb);
}

BinaryMask dilate(const BinaryMask& m, double radius_mm) {
  if (!(radius_mm >= 0.0)) throw SpecError("dilation radius must be >= 0");
  BinaryMask out = m;
  const auto& d = m.grid.dims;
  const std::size_t stride[3] = {1, d.nx, d.nx * d.ny};
  // Separable: a running max along each axis in turn.
  for (std::size_t axis = 0; axis < 3; ++axis) {
    const auto r = static_cast<long>(std::floor(radius_mm / m.grid.spacing[axis] + 1e-9));
    if (r == 0) continue;
    const std::vector<std::uint8_t> src = out.voxels;
    const long n = static_cast<long>(d[axis]);
    for (std::size_t idx = 0; idx < src.size(); ++idx) {
      if (!src[idx]) continue;
      const long pos = static_cast<long>((idx / stride[axis]) % d[axis]);
      const std::size_t line = idx - static_cast<std::size_t>(pos) * stride[axis];
      for (long q = std::max(0L, pos - r); q <= std::min(n - 1, pos + r); ++q) {
        out.voxels[line + static_cast<std::size_t>(q) * stride[axis]] = 1;
      }
    }
  }
  return out;
}

Volume apply_mask(const Volume& v, const BinaryMask& m, double fill) {
  if (!(v.dims() == m.grid.dims)) throw SizeError("mask and volume geometry differ");
  Volume out = v;
  auto vox = out.voxels();
  for (std::size_t i = 0; i < vox.size(); ++i) {
    if (!m.voxels[i]) vox[i] = fill;
  }
  return out;
}

}  // namespace ralmac
