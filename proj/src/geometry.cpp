#include "ralmac/geometry.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include "ralmac/errors.hpp"
#include "ralmac/lesion.hpp"

namespace ralmac {

namespace {
// Round-off slack on the grid boundary, in voxels.
constexpr double kEdgeTolerance = 1e-6;
}  // namespace

bool Grid::contains_index(const Index3& idx) const {
  constexpr double e = kEdgeTolerance;
  return idx.i >= -e && idx.j >= -e && idx.k >= -e && idx.i <= static_cast<double>(dims.nx - 1) + e &&
         idx.j <= static_cast<double>(dims.ny - 1) + e && idx.k <= static_cast<double>(dims.nz - 1) + e;
}

double Grid::min_spacing() const { return std::min({spacing.x, spacing.y, spacing.z}); }

Point3 voxel_to_physical(const Grid& grid, const Index3& index) {
  return {grid.origin.x + index.i * grid.spacing.x, grid.origin.y + index.j * grid.spacing.y,
          grid.origin.z + index.k * grid.spacing.z};
}

Index3 physical_to_voxel(const Grid& grid, const Point3& p) {
  return {(p.x - grid.origin.x) / grid.spacing.x, (p.y - grid.origin.y) / grid.spacing.y,
          (p.z - grid.origin.z) / grid.spacing.z};
}

namespace {

void validate_grid(const Grid& grid) {
  if (grid.dims.nx == 0 || grid.dims.ny == 0 || grid.dims.nz == 0) {
    throw SpecError("volume dims must be >= 1 along every axis");
  }
  for (std::size_t a = 0; a < 3; ++a) {
    if (!(grid.spacing[a] > 0.0) || !std::isfinite(grid.spacing[a])) {
      throw SpecError("volume spacing must be strictly positive");
    }
  }
  if (!grid.origin.is_finite()) throw SpecError("volume origin must be finite");
}

}  // namespace

Volume::Volume(Grid grid) : grid_(grid) {
  validate_grid(grid_);
  voxels_.assign(grid_.dims.count(), 0.0);
}

Volume::Volume(Grid grid, std::vector<double> voxels) : grid_(grid), voxels_(std::move(voxels)) {
  validate_grid(grid_);
  if (voxels_.size() != grid_.dims.count()) {
    throw SizeError("voxel buffer length " + std::to_string(voxels_.size()) + " does not match dims " +
                    std::to_string(grid_.dims.count()));
  }
  if (!std::all_of(voxels_.begin(), voxels_.end(), [](double v) { return std::isfinite(v); })) {
    throw DataError("volume contains non-finite intensities");
  }
}

double Volume::interpolate(const Index3& idx, double fill) const {
  if (!grid_.contains_index(idx)) return fill;
  const auto& d = grid_.dims;
  // Clamp into the grid and keep the upper corner in range on the last plane.
  const auto base = [](double c, std::size_t n, double& frac) {
    c = std::clamp(c, 0.0, static_cast<double>(n - 1));
    std::size_t b = n > 1 ? std::min(static_cast<std::size_t>(c), n - 2) : std::size_t{0};
    frac = n > 1 ? c - static_cast<double>(b) : 0.0;
    // Snap round-off so voxel centers reproduce stored values exactly.
    if (frac < 1e-9) frac = 0.0;
    if (frac > 1.0 - 1e-9) frac = 1.0;
    return b;
  };
  double fx, fy, fz;
  const std::size_t i0 = base(idx.i, d.nx, fx), j0 = base(idx.j, d.ny, fy), k0 = base(idx.k, d.nz, fz);
  const std::size_t sx = d.nx > 1 ? 1 : 0;
  const std::size_t sy = d.ny > 1 ? d.nx : 0;
  const std::size_t sz = d.nz > 1 ? d.nx * d.ny : 0;
  const double* p = voxels_.data() + grid_.linear(i0, j0, k0);
  const double c00 = std::lerp(p[0], p[sx], fx);
  const double c10 = std::lerp(p[sy], p[sy + sx], fx);
  const double c01 = std::lerp(p[sz], p[sz + sx], fx);
  const double c11 = std::lerp(p[sz + sy], p[sz + sy + sx], fx);
  return std::lerp(std::lerp(c00, c10, fy), std::lerp(c01, c11, fy), fz);
}

std::array<double, 2> Volume::intensity_range() const {
  const auto [lo, hi] = std::minmax_element(voxels_.begin(), voxels_.end());
  return {*lo, *hi};
}

std::string_view to_string(LesionClass c) { return c == LesionClass::Target ? "target" : "non-target"; }

std::optional<LesionClass> parse_lesion_class(std::string_view text) {
  std::string lower;
  for (char ch : text) {
    if (ch != '-' && ch != '_' && ch != ' ') lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }
  if (lower == "target" || lower == "t") return LesionClass::Target;
  if (lower == "nontarget" || lower == "nt") return LesionClass::NonTarget;
  return std::nullopt;
}

bool naming_order_less(const LesionAnnotation& a, const LesionAnnotation& b) {
  return std::tie(a.timepoint_id, a.series_id, a.reader_id, a.source_label) <
         std::tie(b.timepoint_id, b.series_id, b.reader_id, b.source_label);
}

void LesionTrack::refresh_reference_centroid() {
  if (observations.empty()) return;
  Point3 sum;
  for (const auto& obs : observations) sum = sum + obs.mapped_centroid;
  reference_centroid = (1.0 / static_cast<double>(observations.size())) * sum;
}

std::string canonical_name(LesionClass c, int index) {
  return (c == LesionClass::Target ? "G" : "NG") + std::to_string(index);
}

std::optional<std::pair<LesionClass, int>> parse_canonical_name(std::string_view name) {
  LesionClass c;
  if (name.starts_with("NG")) {
    c = LesionClass::NonTarget;
    name.remove_prefix(2);
  } else if (name.starts_with("G")) {
    c = LesionClass::Target;
    name.remove_prefix(1);
  } else {
    return std::nullopt;
  }
  if (name.empty() || name.size() > 9 || name.front() == '0') return std::nullopt;
  int k = 0;
  for (char ch : name) {
    if (ch < '0' || ch > '9') return std::nullopt;
    k = k * 10 + (ch - '0');
  }
  return std::make_pair(c, k);
}

}  // namespace ralmac
