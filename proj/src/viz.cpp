#include "ralmac/viz.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

#include "ralmac/errors.hpp"

namespace ralmac {

namespace {

using Rgb = std::array<std::uint8_t, 3>;

constexpr Rgb kTargetColor{255, 0, 0};
constexpr Rgb kNonTargetColor{0, 0, 0};
constexpr Rgb kCaptionColor{255, 220, 0};
constexpr Rgb kGapColor{40, 40, 40};
constexpr std::size_t kGap = 4;
constexpr int kFontScale = 2;

// 3x5 glyphs, one row per entry, bit 2 = leftmost column.
struct Glyph {
  char ch;
  std::uint8_t rows[5];
};

constexpr Glyph kFont[] = {
    {'0', {7, 5, 5, 5, 7}}, {'1', {2, 6, 2, 2, 7}}, {'2', {7, 1, 7, 4, 7}}, {'3', {7, 1, 7, 1, 7}},
    {'4', {5, 5, 7, 1, 1}}, {'5', {7, 4, 7, 1, 7}}, {'6', {7, 4, 7, 5, 7}}, {'7', {7, 1, 2, 2, 2}},
    {'8', {7, 5, 7, 5, 7}}, {'9', {7, 5, 7, 1, 7}}, {'A', {2, 5, 7, 5, 5}}, {'B', {6, 5, 6, 5, 6}},
    {'C', {3, 4, 4, 4, 3}}, {'D', {6, 5, 5, 5, 6}}, {'E', {7, 4, 6, 4, 7}}, {'F', {7, 4, 6, 4, 4}},
    {'G', {3, 4, 5, 5, 3}}, {'H', {5, 5, 7, 5, 5}}, {'I', {7, 2, 2, 2, 7}}, {'J', {1, 1, 1, 5, 2}},
    {'K', {5, 5, 6, 5, 5}}, {'L', {4, 4, 4, 4, 7}}, {'M', {5, 7, 7, 5, 5}}, {'N', {6, 5, 5, 5, 5}},
    {'O', {2, 5, 5, 5, 2}}, {'P', {6, 5, 6, 4, 4}}, {'Q', {2, 5, 5, 6, 3}}, {'R', {6, 5, 6, 5, 5}},
    {'S', {3, 4, 2, 1, 6}}, {'T', {7, 2, 2, 2, 2}}, {'U', {5, 5, 5, 5, 7}}, {'V', {5, 5, 5, 5, 2}},
    {'W', {5, 5, 7, 7, 5}}, {'X', {5, 5, 2, 5, 5}}, {'Y', {5, 5, 2, 2, 2}}, {'Z', {7, 1, 2, 4, 7}},
    {'-', {0, 0, 7, 0, 0}}, {':', {0, 2, 0, 2, 0}}, {'=', {0, 7, 0, 7, 0}}, {'.', {0, 0, 0, 0, 2}},
    {'_', {0, 0, 0, 0, 7}},
};

const Glyph* find_glyph(char c) {
  const char up = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (const auto& g : kFont) {
    if (g.ch == up) return &g;
  }
  return nullptr;
}

// Pixels at or right of x_limit are dropped so text stays inside its panel.
void draw_text(RgbImage& img, long x, long y, const std::string& text, Rgb color, long x_limit) {
  for (char c : text) {
    if (const Glyph* g = find_glyph(c)) {
      for (int r = 0; r < 5; ++r) {
        for (int col = 0; col < 3; ++col) {
          if (!(g->rows[r] & (4 >> col))) continue;
          for (int sy = 0; sy < kFontScale; ++sy) {
            for (int sx = 0; sx < kFontScale; ++sx) {
              const long px = x + col * kFontScale + sx, py = y + r * kFontScale + sy;
              if (px >= 0 && py >= 0 && px < x_limit) img.set(std::size_t(px), std::size_t(py), color);
            }
          }
        }
      }
    }
    x += 4 * kFontScale;
  }
}

void draw_marker(RgbImage& img, double cx, double cy, Rgb color, std::size_t x0, std::size_t x1) {
  const long ix = std::lround(cx), iy = std::lround(cy);
  const auto put = [&](long x, long y) {
    if (x >= long(x0) && x < long(x1) && y >= 0) img.set(std::size_t(x), std::size_t(y), color);
  };
  for (long dy = -1; dy <= 1; ++dy) {
    for (long dx = -1; dx <= 1; ++dx) put(ix + dx, iy + dy);
  }
  constexpr double kRing = 6.0;
  for (int a = 0; a < 96; ++a) {
    const double t = 2.0 * 3.14159265358979323846 * a / 96.0;
    put(std::lround(cx + kRing * std::cos(t)), std::lround(cy + kRing * std::sin(t)));
  }
}

std::uint8_t to_gray(double v, const std::array<double, 2>& window) {
  const double span = window[1] - window[0];
  const double t = span > 0.0 ? (v - window[0]) / span : (v >= window[1] ? 1.0 : 0.0);
  return static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(t, 0.0, 1.0)));
}

// In-plane axes (horizontal, vertical) and the normal of each panel.
constexpr int kAxes[3][3] = {{0, 1, 2}, {1, 2, 0}, {0, 2, 1}};
constexpr bool kVerticalUp[3] = {false, true, true};
constexpr const char* kPanelName[3] = {"AXIAL Z", "SAGITTAL X", "CORONAL Y"};

}  // namespace

std::array<double, 2> default_window(const Volume& v) {
  std::vector<double> values(v.voxels().begin(), v.voxels().end());
  const auto pick = [&](double q) {
    const auto k = static_cast<std::size_t>(std::floor(q * double(values.size() - 1)));
    std::nth_element(values.begin(), values.begin() + static_cast<long>(k), values.end());
    return values[k];
  };
  const double lo = pick(0.01);
  const double hi = pick(0.99);
  return {lo, hi};
}

std::array<double, 2> TriaxialLayout::to_pixel(int panel, const Point3& p, const Point3& focus) const {
  const double half = double(panel_size / 2);
  const int h = kAxes[panel][0], v = kAxes[panel][1];
  const double x = half + (p[h] - focus[h]) / pixel_mm + double(panel) * double(panel_size + gap);
  const double dy = (p[v] - focus[v]) / pixel_mm;
  return {x, kVerticalUp[panel] ? half - dy : half + dy};
}

RgbImage render_triaxial(const TriaxialRequest& req, TriaxialLayout* layout_out) {
  if (!req.volume) throw SpecError("triaxial request needs a volume");
  if (!(req.alpha > 0.0) || req.alpha > 1.0) throw SpecError("alpha must be in (0, 1]");
  const Volume& base = *req.volume;
  const bool in_base = base.grid().contains_index(physical_to_voxel(base, req.focus));
  const bool in_overlay = req.overlay && req.overlay->grid().contains_index(physical_to_voxel(*req.overlay, req.focus));
  if (!in_base && !in_overlay) throw OutOfBounds("focus point lies outside every volume");

  const auto window = req.window ? *req.window : default_window(base);
  TriaxialLayout layout;
  layout.pixel_mm = base.grid().min_spacing();
  double extent = 0.0;
  for (std::size_t a = 0; a < 3; ++a) extent = std::max(extent, double(base.dims()[a]) * base.spacing()[a]);
  const auto half = static_cast<std::size_t>(std::ceil(0.5 * extent / layout.pixel_mm));
  layout.panel_size = 2 * half + 1;
  layout.gap = kGap;
  const Index3 fidx = physical_to_voxel(base, req.focus);
  const auto clamp_index = [](double v, std::size_t n) {
    return static_cast<std::size_t>(std::clamp(std::lround(v), 0L, long(n) - 1));
  };
  layout.slice_index = {clamp_index(fidx.k, base.dims().nz), clamp_index(fidx.i, base.dims().nx),
                        clamp_index(fidx.j, base.dims().ny)};

  const std::size_t P = layout.panel_size;
  RgbImage img(3 * P + 2 * kGap, P);
  for (std::size_t y = 0; y < img.height; ++y) {
    for (std::size_t g = 0; g < kGap; ++g) {
      img.set(P + g, y, kGapColor);
      img.set(2 * P + kGap + g, y, kGapColor);
    }
  }
  constexpr double kOutside = std::numeric_limits<double>::quiet_NaN();
  for (int panel = 0; panel < 3; ++panel) {
    const int h = kAxes[panel][0], v = kAxes[panel][1];
    const std::size_t x0 = std::size_t(panel) * (P + kGap);
    for (std::size_t py = 0; py < P; ++py) {
      for (std::size_t px = 0; px < P; ++px) {
        Point3 p = req.focus;
        p[h] += (double(px) - double(half)) * layout.pixel_mm;
        const double dy = (double(py) - double(half)) * layout.pixel_mm;
        p[v] += kVerticalUp[panel] ? -dy : dy;
        const double b = base.sample(p, kOutside);
        double gray = std::isnan(b) ? 0.0 : to_gray(b, window);
        if (req.overlay) {
          const double o = req.overlay->sample(p, kOutside);
          if (!std::isnan(o)) {
            gray = std::isnan(b) ? to_gray(o, window) : (1.0 - req.alpha) * gray + req.alpha * to_gray(o, window);
          }
        }
        const auto g8 = static_cast<std::uint8_t>(std::lround(gray));
        img.set(x0 + px, py, {g8, g8, g8});
      }
    }
    // Markers close to this slice plane.
    const int normal = kAxes[panel][2];
    const double slab = std::max(3.0, 1.5 * base.spacing()[std::size_t(normal)]);
    for (const auto& m : req.markers) {
      if (std::abs(m.position[normal] - req.focus[normal]) > slab) continue;
      const auto pix = layout.to_pixel(panel, m.position, req.focus);
      const Rgb color = m.lesion_class == LesionClass::Target ? kTargetColor : kNonTargetColor;
      draw_marker(img, pix[0], pix[1], color, x0, x0 + P);
      if (!m.label.empty()) draw_text(img, std::lround(pix[0]) + 9, std::lround(pix[1]) - 5, m.label, color,
                                     long(x0 + P));
    }
    std::string caption = std::string(kPanelName[panel]) + "=" + std::to_string(layout.slice_index[panel]);
    if (long(caption.size()) * 4 * kFontScale > long(P) - 3) caption = caption.substr(caption.find(' ') + 1);
    draw_text(img, long(x0) + 3, 3, caption, kCaptionColor, long(x0 + P));
  }
  if (layout_out) *layout_out = layout;
  return img;
}

void render_triaxial(const TriaxialRequest& req, const std::filesystem::path& out_path) {
  write_png(render_triaxial(req), out_path);
}

std::vector<std::filesystem::path> render_track_sheet(
    const TrackRegistry& registry,
    const std::function<std::optional<Volume>(const std::string& timepoint, const std::string& series)>& volumes,
    const std::filesystem::path& out_dir, std::vector<std::string>* log) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  for (const auto& track : registry.tracks) {
    for (const auto& obs : track.observations) {
      const auto& a = obs.annotation;
      const auto volume = volumes(a.timepoint_id, a.series_id);
      const std::string name = registry.patient_id + "_" + track.canonical_name + "_" + a.timepoint_id + "_" +
                               a.series_id + "_" + a.reader_id + ".png";
      if (!volume) {
        if (log) log->push_back("skipped " + name + ": no volume for " + a.timepoint_id + "/" + a.series_id);
        continue;
      }
      TriaxialRequest req;
      req.volume = &*volume;
      req.focus = a.centroid;
      for (const auto& other : track.observations) {
        if (other.annotation.timepoint_id == a.timepoint_id && other.annotation.series_id == a.series_id) {
          req.markers.push_back({other.annotation.centroid, track.canonical_name, track.lesion_class});
        }
      }
      try {
        render_triaxial(req, out_dir / name);
        written.push_back(out_dir / name);
      } catch (const OutOfBounds&) {
        if (log) log->push_back("skipped " + name + ": centroid outside its volume");
      }
    }
  }
  return written;
}

}  // namespace ralmac
