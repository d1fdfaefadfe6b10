#include "ralmac/image_ops.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ralmac/errors.hpp"

namespace ralmac {

namespace {

std::vector<double> gaussian_kernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(4.0 * sigma)));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    sum += k[i + radius];
  }
  for (auto& w : k) w /= sum;
  return k;
}

void blur_axis(std::vector<double>& data, const Dims& d, int axis, const std::vector<double>& kernel) {
  const std::size_t n = d[axis];
  if (n < 2) return;
  const std::size_t stride = axis == 0 ? 1 : (axis == 1 ? d.nx : d.nx * d.ny);
  const int radius = static_cast<int>(kernel.size() / 2);
  std::vector<double> line(n), out(n);
  // Visit each line along `axis` once.
  for (std::size_t k = 0; k < (axis == 2 ? 1 : d.nz); ++k) {
    for (std::size_t j = 0; j < (axis == 1 ? 1 : d.ny); ++j) {
      for (std::size_t i = 0; i < (axis == 0 ? 1 : d.nx); ++i) {
        const std::size_t base = i + d.nx * (j + d.ny * k);
        for (std::size_t s = 0; s < n; ++s) line[s] = data[base + s * stride];
        for (std::size_t s = 0; s < n; ++s) {
          double acc = 0.0;
          for (int t = -radius; t <= radius; ++t) {
            const auto src = std::clamp<long>(static_cast<long>(s) + t, 0, static_cast<long>(n) - 1);
            acc += kernel[t + radius] * line[static_cast<std::size_t>(src)];
          }
          out[s] = acc;
        }
        for (std::size_t s = 0; s < n; ++s) data[base + s * stride] = out[s];
      }
    }
  }
}

}  // namespace

Volume gaussian_smooth(const Volume& v, double sigma_voxels) {
  if (!(sigma_voxels > 0.0)) return v;
  const auto kernel = gaussian_kernel(sigma_voxels);
  std::vector<double> data(v.voxels().begin(), v.voxels().end());
  for (int axis = 0; axis < 3; ++axis) blur_axis(data, v.dims(), axis, kernel);
  return Volume(v.grid(), std::move(data));
}

Volume shrink(const Volume& v, int factor) {
  if (factor < 1) throw SpecError("shrink factor must be >= 1");
  if (factor == 1) return v;
  const auto f = static_cast<std::size_t>(factor);
  Grid g = v.grid();
  g.dims = {std::max<std::size_t>(1, v.dims().nx / f), std::max<std::size_t>(1, v.dims().ny / f),
            std::max<std::size_t>(1, v.dims().nz / f)};
  g.spacing = factor * v.spacing();
  Volume out(g);
  for (std::size_t k = 0; k < g.dims.nz; ++k) {
    for (std::size_t j = 0; j < g.dims.ny; ++j) {
      for (std::size_t i = 0; i < g.dims.nx; ++i) out.at(i, j, k) = v.at(i * f, j * f, k * f);
    }
  }
  return out;
}

Volume resample(const Volume& moving, const RigidTransform& t, const Grid& reference_grid, double fill) {
  Volume out(reference_grid);
  const Matrix3 r = t.rotation();
  const auto& d = reference_grid.dims;
  for (std::size_t k = 0; k < d.nz; ++k) {
    for (std::size_t j = 0; j < d.ny; ++j) {
      for (std::size_t i = 0; i < d.nx; ++i) {
        const Point3 p = voxel_to_physical(reference_grid, {double(i), double(j), double(k)});
        const Point3 q = t.center + multiply(r, p - t.center) + t.translation;
        out.at(i, j, k) = moving.sample(q, fill);
      }
    }
  }
  return out;
}

}  // namespace ralmac
