#include "ralmac/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "ralmac/errors.hpp"
#include "ralmac/image_ops.hpp"
#include "ralmac/matching.hpp"
#include "ralmac/tracks_json.hpp"
#include "ralmac/volume_io.hpp"

namespace ralmac {

namespace {

double ellipsoid_radius2(const Point3& p, const Point3& center, const Point3& semi) {
  const Point3 d = p - center;
  return (d.x * d.x) / (semi.x * semi.x) + (d.y * d.y) / (semi.y * semi.y) + (d.z * d.z) / (semi.z * semi.z);
}

std::string default_label(const PhantomLesion& l, int target_k, int nontarget_k) {
  if (!l.label.empty()) return l.label;
  return l.lesion_class == LesionClass::Target ? "T" + std::to_string(target_k) : "NT" + std::to_string(nontarget_k);
}

std::mt19937_64 seeded(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * (double(rng() >> 11) * 0x1.0p-53);
}

}  // namespace

void PhantomSpec::validate() const {
  for (std::size_t a = 0; a < 3; ++a) {
    if (!(body_semi_axes[a] > 0.0)) throw SpecError("body semi-axes must be positive");
  }
  const double max_spacing = std::max({grid.spacing.x, grid.spacing.y, grid.spacing.z});
  for (const auto& l : lesions) {
    if (!(l.radius_mm > max_spacing)) throw SpecError("lesion radius must exceed the voxel spacing");
    if (!(ellipsoid_radius2(l.center, body_center, body_semi_axes) < 1.0)) {
      throw SpecError("lesion centered outside the body ellipsoid");
    }
  }
}

Phantom generate_phantom(const PhantomSpec& spec) {
  spec.validate();
  Volume v(spec.grid);
  const auto& d = spec.grid.dims;
  // 2x2x2 supersampling gives partial-volume edges.
  constexpr int kSub = 2;
  for (std::size_t k = 0; k < d.nz; ++k) {
    for (std::size_t j = 0; j < d.ny; ++j) {
      for (std::size_t i = 0; i < d.nx; ++i) {
        double acc = 0.0;
        for (int sk = 0; sk < kSub; ++sk) {
          for (int sj = 0; sj < kSub; ++sj) {
            for (int si = 0; si < kSub; ++si) {
              const Index3 idx{double(i) + (si + 0.5) / kSub - 0.5, double(j) + (sj + 0.5) / kSub - 0.5,
                               double(k) + (sk + 0.5) / kSub - 0.5};
              const Point3 p = voxel_to_physical(spec.grid, idx);
              double value = spec.background_intensity;
              if (ellipsoid_radius2(p, spec.body_center, spec.body_semi_axes) <= 1.0) value = spec.body_intensity;
              for (const auto& l : spec.lesions) {
                if (distance(p, l.center) <= l.radius_mm) value = l.intensity;
              }
              acc += value;
            }
          }
        }
        v.at(i, j, k) = acc / (kSub * kSub * kSub);
      }
    }
  }
  if (spec.noise_sigma > 0.0) v = add_noise(v, spec.noise_sigma, spec.rng_seed);

  std::vector<LesionAnnotation> rows;
  int tk = 0, ntk = 0;
  for (const auto& l : spec.lesions) {
    l.lesion_class == LesionClass::Target ? ++tk : ++ntk;
    rows.push_back({spec.patient_id, spec.timepoint_id, spec.series_id, spec.reader_id, l.lesion_class,
                    default_label(l, tk, ntk), l.center});
  }
  return {std::move(v), AnnotationTable(std::move(rows))};
}

Volume add_noise(const Volume& v, double sigma, std::uint64_t seed) {
  Volume out = v;
  auto rng = seeded(seed, 0x6e6f697365ULL);
  std::normal_distribution<double> noise(0.0, sigma);
  for (auto& x : out.voxels()) x += noise(rng);
  return out;
}

Phantom transform_phantom(const Volume& v, const AnnotationTable& truth, const RigidTransform& t,
                          const Grid& out_grid, double fill) {
  Volume out = resample(v, t, out_grid, fill);
  const RigidTransform inverse = invert_transform(t);
  std::vector<LesionAnnotation> rows = truth.rows();
  for (auto& r : rows) r.centroid = apply_transform(inverse, r.centroid);
  return {std::move(out), AnnotationTable(std::move(rows))};
}

Phantom transform_phantom(const Volume& v, const AnnotationTable& truth, const RigidTransform& t,
                          const Grid& out_grid) {
  return transform_phantom(v, truth, t, out_grid, v.intensity_range()[0]);
}

std::vector<StudyLesion> default_study_lesions() {
  return {
      {{{45.0, 55.0, 60.0}, 6.0, 120.0, LesionClass::Target, ""}, 0},
      {{{85.0, 50.0, 68.0}, 5.0, 100.0, LesionClass::Target, ""}, 0},
      {{{62.0, 80.0, 56.0}, 5.0, 110.0, LesionClass::Target, ""}, 0},
      {{{70.0, 62.0, 74.0}, 4.5, 90.0, LesionClass::NonTarget, ""}, 0},
      {{{50.0, 74.0, 70.0}, 5.0, 105.0, LesionClass::Target, ""}, 1},
  };
}

Study generate_study(const StudySpec& spec, const std::vector<StudyLesion>& lesions) {
  Study study;
  study.lesions = lesions;
  auto rng = seeded(spec.seed, 0x7374756479ULL);
  const double deg = std::numbers::pi / 180.0;
  const Point3 volume_center =
      voxel_to_physical(spec.anatomy.grid, {0.5 * double(spec.anatomy.grid.dims.nx - 1),
                                            0.5 * double(spec.anatomy.grid.dims.ny - 1),
                                            0.5 * double(spec.anatomy.grid.dims.nz - 1)});

  std::vector<LesionAnnotation> rows;
  for (std::size_t tp = 0; tp < spec.timepoints.size(); ++tp) {
    // Noise-free anatomy at this timepoint in the patient frame.
    PhantomSpec anatomy = spec.anatomy;
    anatomy.noise_sigma = 0.0;
    anatomy.lesions.clear();
    std::vector<std::size_t> present;
    for (std::size_t l = 0; l < lesions.size(); ++l) {
      if (lesions[l].first_timepoint <= tp) {
        anatomy.lesions.push_back(lesions[l].lesion);
        present.push_back(l);
      }
    }
    const Volume base = generate_phantom(anatomy).volume;

    for (std::size_t s = 0; s < spec.series.size(); ++s) {
      // Series pose: the reference series of the first timepoint is the patient frame.
      RigidTransform pose;
      pose.center = volume_center;
      if (tp != 0 || s != 0) {
        pose.angles = {uniform(rng, -spec.max_angle_deg, spec.max_angle_deg) * deg,
                       uniform(rng, -spec.max_angle_deg, spec.max_angle_deg) * deg,
                       uniform(rng, -spec.max_angle_deg, spec.max_angle_deg) * deg};
        pose.translation = {uniform(rng, -spec.max_translation_mm, spec.max_translation_mm),
                            uniform(rng, -spec.max_translation_mm, spec.max_translation_mm),
                            uniform(rng, -spec.max_translation_mm, spec.max_translation_mm)};
      }
      Volume series_volume = resample(base, pose, spec.anatomy.grid, spec.anatomy.background_intensity);
      if (spec.noise_sigma > 0.0) series_volume = add_noise(series_volume, spec.noise_sigma, rng());
      study.volumes.push_back({{spec.timepoints[tp], spec.series[s]}, std::move(series_volume)});

      const RigidTransform to_series = invert_transform(pose);
      for (std::size_t r = 0; r < spec.readers.size(); ++r) {
        // Each reader numbers its lesions in its own order (label swaps across readers).
        std::vector<std::size_t> order(present.size());
        for (std::size_t q = 0; q < order.size(); ++q) order[q] = q;
        std::shuffle(order.begin(), order.end(), rng);
        int tk = 0, ntk = 0;
        for (std::size_t q : order) {
          const StudyLesion& sl = lesions[present[q]];
          // Jitter uniform in a ball of radius reader_jitter_mm.
          Point3 jitter;
          do {
            jitter = {uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1)};
          } while (norm(jitter) > 1.0);
          const Point3 c = apply_transform(to_series, sl.lesion.center) + spec.reader_jitter_mm * jitter;
          const bool target = sl.lesion.lesion_class == LesionClass::Target;
          const std::string label = target ? "T" + std::to_string(++tk) : "NT" + std::to_string(++ntk);
          rows.push_back({spec.patient_id, spec.timepoints[tp], spec.series[s], spec.readers[r],
                          sl.lesion.lesion_class, label, c});
          study.truth_lesion_of_row.push_back(present[q]);
        }
      }
    }
  }
  // AnnotationTable sorts rows; carry the truth index through the sort.
  std::vector<std::size_t> perm(rows.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  std::sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) {
    const auto& x = rows[a];
    const auto& y = rows[b];
    return std::tie(x.patient_id, x.timepoint_id, x.series_id, x.reader_id, x.lesion_class, x.source_label) <
           std::tie(y.patient_id, y.timepoint_id, y.series_id, y.reader_id, y.lesion_class, y.source_label);
  });
  std::vector<std::size_t> truth(rows.size());
  for (std::size_t i = 0; i < perm.size(); ++i) truth[i] = study.truth_lesion_of_row[perm[i]];
  study.annotations = AnnotationTable(std::move(rows));
  study.truth_lesion_of_row = std::move(truth);
  return study;
}

void write_study(const Study& study, const std::string& patient_id, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "volumes");
  save_annotations(study.annotations, dir / "annotations.csv");
  for (const auto& [key, volume] : study.volumes) {
    save_volume(volume, dir / "volumes" / (patient_id + "_" + key.first + "_" + key.second), DType::F32);
  }
  // Truth tracks: one per true lesion, named in order of first appearance.
  TrackRegistry truth;
  truth.patient_id = patient_id;
  std::vector<std::vector<Observation>> groups(study.lesions.size());
  for (std::size_t r = 0; r < study.annotations.size(); ++r) {
    const auto& a = study.annotations.rows()[r];
    groups[study.truth_lesion_of_row[r]].push_back({a, a.centroid});
  }
  for (std::size_t l = 0; l < groups.size(); ++l) {
    if (!groups[l].empty()) truth.open_track(study.lesions[l].lesion.lesion_class, groups[l]);
  }
  std::ofstream out(dir / "truth.json");
  out << tracks_to_json(truth).dump(2) << '\n';
}

}  // namespace ralmac
