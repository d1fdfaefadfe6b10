#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ralmac/geometry.hpp"
#include "ralmac/lesion.hpp"
#include "ralmac/matching.hpp"

namespace ralmac {

/// 8-bit RGB raster, row-major, top row first.
struct RgbImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // 3 * width * height

  RgbImage() = default;
  RgbImage(std::size_t w, std::size_t h) : width(w), height(h), pixels(3 * w * h, 0) {}
  std::array<std::uint8_t, 3> at(std::size_t x, std::size_t y) const;
  void set(std::size_t x, std::size_t y, std::array<std::uint8_t, 3> rgb);
};

void write_png(const RgbImage& image, const std::filesystem::path& path);

struct Marker {
  Point3 position;
  std::string label;
  LesionClass lesion_class = LesionClass::Target;
};

struct TriaxialRequest {
  const Volume* volume = nullptr;
  const Volume* overlay = nullptr;  // optional, blended with `alpha`
  double alpha = 0.5;
  Point3 focus;
  std::vector<Marker> markers;
  std::optional<std::array<double, 2>> window;  // default: 1st-99th percentile of `volume`
};

/// Panel geometry of a rendered triaxial image.
struct TriaxialLayout {
  std::size_t panel_size = 0;    // square panels, pixels
  std::size_t gap = 0;
  double pixel_mm = 1.0;
  std::array<std::size_t, 3> slice_index{};  // axial k, sagittal i, coronal j of the focus
  /// Pixel of a physical point inside panel p (0 axial, 1 sagittal, 2 coronal),
  /// in whole-image coordinates.
  std::array<double, 2> to_pixel(int panel, const Point3& p, const Point3& focus) const;
};

/// Axial (x-y), sagittal (y-z) and coronal (x-z) slices through the focus,
/// side by side, each centered on the focus. Targets are marked red,
/// non-targets black; each panel is captioned with its slice index. Throws
/// OutOfBounds when the focus lies outside every volume.
RgbImage render_triaxial(const TriaxialRequest& req, TriaxialLayout* layout = nullptr);

void render_triaxial(const TriaxialRequest& req, const std::filesystem::path& out_path);

/// 1st and 99th intensity percentiles.
std::array<double, 2> default_window(const Volume& v);

/// One triaxial image per (track, observation), focused on the observation's
/// own centroid in its series volume, named
/// `<patient>_<track>_<timepoint>_<series>_<reader>.png`. Observations whose
/// volume cannot be loaded are skipped and reported in `log`.
std::vector<std::filesystem::path> render_track_sheet(
    const TrackRegistry& registry,
    const std::function<std::optional<Volume>(const std::string& timepoint, const std::string& series)>& volumes,
    const std::filesystem::path& out_dir, std::vector<std::string>* log = nullptr);

}  // namespace ralmac
