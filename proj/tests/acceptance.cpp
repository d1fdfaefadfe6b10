// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "ralmac/annotation_io.hpp"
#include "ralmac/assignment.hpp"
#include "ralmac/evaluation.hpp"
#include "ralmac/image_ops.hpp"
#include "ralmac/mask.hpp"
#include "ralmac/matching.hpp"
#include "ralmac/mutual_information.hpp"
#include "ralmac/pipeline.hpp"
#include "ralmac/registration.hpp"
#include "ralmac/synth.hpp"
#include "ralmac/tracks_json.hpp"
#include "support.hpp"

using namespace ralmac;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

// ---- 1: assignment against exhaustive search

double brute_force_min(const CostMatrix& c) {
  const bool flip = c.rows() > c.cols();
  const std::size_t small = flip ? c.cols() : c.rows();
  const std::size_t large = flip ? c.rows() : c.cols();
  std::vector<std::size_t> perm(large);
  for (std::size_t i = 0; i < large; ++i) perm[i] = i;
  double best = small == 0 ? 0.0 : std::numeric_limits<double>::infinity();
  // Every injection small -> large appears as the prefix of some permutation.
  do {
    double s = 0;
    for (std::size_t i = 0; i < small; ++i) s += flip ? c(perm[i], i) : c(i, perm[i]);
    best = std::min(best, s);
  } while (small > 0 && std::next_permutation(perm.begin(), perm.end()));
  return best;
}

Outcome criterion_assignment() {
  std::mt19937_64 rng(1001);
  const auto start = Clock::now();
  int instances = 0, mismatches = 0;
  for (std::size_t n = 0; n <= 6; ++n)
    for (std::size_t m = 0; m <= 6; ++m)
      for (int k = 0; k < 200; ++k) {
        std::vector<double> v(n * m);
        for (auto& x : v) x = testing::uniform(rng, 0, 100);
        const CostMatrix c(n, m, v);
        const auto a = solve_assignment(c);
        ++instances;
        if (a.pairs.size() != std::min(n, m) || a.total_cost(c) != brute_force_min(c)) {
          // Exact up to summation order.
          if (a.pairs.size() != std::min(n, m) || std::abs(a.total_cost(c) - brute_force_min(c)) > 1e-9) ++mismatches;
        }
      }
  const double t = seconds_since(start);
  std::ostringstream d;
  d << instances << " instances, " << mismatches << " mismatches, " << t << " s";
  return {mismatches == 0 && t < 5.0, d.str()};
}

// ---- 2: threshold semantics

Outcome criterion_thresholds() {
  std::mt19937_64 rng(1002);
  const MatchConfig cfg;
  int violations = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const auto side = [&](std::size_t n, std::vector<LesionClass>& cls, std::vector<Point3>& pts) {
      for (std::size_t i = 0; i < n; ++i) {
        cls.push_back(rng() % 2 ? LesionClass::Target : LesionClass::NonTarget);
        pts.push_back({testing::uniform(rng, 0, 120), testing::uniform(rng, 0, 120), testing::uniform(rng, 0, 120)});
      }
    };
    std::vector<LesionClass> ca, cb;
    std::vector<Point3> pa, pb;
    side(rng() % 7, ca, pa);
    side(rng() % 7, cb, pb);
    // Plant pairs exactly on and just past a threshold.
    if (trial % 5 == 0) {
      const LesionClass c = trial % 10 ? LesionClass::Target : LesionClass::NonTarget;
      const double th = cfg.threshold_for(c);
      const Point3 base{500.0 + trial, 0, 0};
      ca.push_back(c);
      pa.push_back(base);
      cb.push_back(c);
      pb.push_back(base + Point3{trial % 2 ? th : std::nextafter(th, 1e9), 0, 0});
    }
    const auto corr = match_centroids(ca, pa, cb, pb, cfg);
    for (const ClassCorrespondence* cc : {&corr.target, &corr.non_target}) {
      const double th = cfg.threshold_for(cc->lesion_class);
      for (const auto& p : cc->matched) {
        if (p.distance_mm > th) ++violations;  // (a)
        if (ca[p.a] != cc->lesion_class || cb[p.b] != cc->lesion_class) ++violations;  // (c)
      }
      for (const auto& p : cc->dissolved) {
        if (!(p.distance_mm > th)) ++violations;  // (b)
        if (ca[p.a] != cc->lesion_class || cb[p.b] != cc->lesion_class) ++violations;
      }
      // (b) the solver's pairs split exactly into kept (<= th) and dissolved (> th).
      std::vector<std::size_t> ia, ib;
      std::vector<Point3> qa, qb;
      for (std::size_t i = 0; i < ca.size(); ++i)
        if (ca[i] == cc->lesion_class) ia.push_back(i), qa.push_back(pa[i]);
      for (std::size_t i = 0; i < cb.size(); ++i)
        if (cb[i] == cc->lesion_class) ib.push_back(i), qb.push_back(pb[i]);
      const auto costs = CostMatrix::pairwise_distances(qa, qb);
      const auto solved = solve_assignment(costs);
      std::set<std::pair<std::size_t, std::size_t>> kept, cut, got_kept, got_cut;
      for (const auto& [r, c] : solved.pairs) (costs(r, c) > th ? cut : kept).insert({ia[r], ib[c]});
      for (const auto& p : cc->matched) got_kept.insert({p.a, p.b});
      for (const auto& p : cc->dissolved) got_cut.insert({p.a, p.b});
      if (kept != got_kept || cut != got_cut) ++violations;
    }
    // (c) removing the other class changes nothing for this one.
    std::vector<LesionClass> ta, tb;
    std::vector<Point3> qa, qb;
    std::vector<std::size_t> ia, ib;
    for (std::size_t i = 0; i < ca.size(); ++i)
      if (ca[i] == LesionClass::Target) ta.push_back(ca[i]), qa.push_back(pa[i]), ia.push_back(i);
    for (std::size_t i = 0; i < cb.size(); ++i)
      if (cb[i] == LesionClass::Target) tb.push_back(cb[i]), qb.push_back(pb[i]), ib.push_back(i);
    const auto alone = match_centroids(ta, qa, tb, qb, cfg);
    std::set<std::pair<std::size_t, std::size_t>> x, y;
    for (const auto& p : alone.target.matched) x.insert({ia[p.a], ib[p.b]});
    for (const auto& p : corr.target.matched) y.insert({p.a, p.b});
    if (x != y) ++violations;
  }
  return {violations == 0, "500 instances, " + std::to_string(violations) + " violations"};
}

// ---- 3: rotation matrix

Outcome criterion_rotation() {
  std::mt19937_64 rng(1003);
  double worst_oracle = 0, worst_ortho = 0;
  for (int n = 0; n < 1000; ++n) {
    const double a1 = testing::uniform(rng, -2 * std::numbers::pi, 2 * std::numbers::pi);
    const double a2 = testing::uniform(rng, -2 * std::numbers::pi, 2 * std::numbers::pi);
    const double a3 = testing::uniform(rng, -2 * std::numbers::pi, 2 * std::numbers::pi);
    const double c1 = std::cos(a1), s1 = std::sin(a1), c2 = std::cos(a2), s2 = std::sin(a2), c3 = std::cos(a3),
                 s3 = std::sin(a3);
    const double rx[3][3] = {{1, 0, 0}, {0, c1, s1}, {0, -s1, c1}};
    const double ry[3][3] = {{c2, 0, -s2}, {0, 1, 0}, {s2, 0, c2}};
    const double rz[3][3] = {{c3, s3, 0}, {-s3, c3, 0}, {0, 0, 1}};
    double expected[3][3] = {};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k)
          for (int l = 0; l < 3; ++l) expected[i][j] += rx[i][k] * ry[k][l] * rz[l][j];
    const Matrix3 r = rotation_matrix({a1, a2, a3});
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        worst_oracle = std::max(worst_oracle, std::abs(r[i][j] - expected[i][j]));
        double dot = 0;
        for (int k = 0; k < 3; ++k) dot += r[k][i] * r[k][j];
        worst_ortho = std::max(worst_ortho, std::abs(dot - (i == j ? 1.0 : 0.0)));
      }
    worst_ortho = std::max(worst_ortho, std::abs(determinant(r) - 1.0));
  }
  std::ostringstream d;
  d << "max oracle deviation " << worst_oracle << ", max orthonormality/det deviation " << worst_ortho;
  return {worst_oracle <= 1e-12 && worst_ortho <= 1e-9, d.str()};
}

// ---- 4 and 5: registration on 64^3 phantoms

PhantomSpec registration_phantom(std::uint64_t seed) {
  PhantomSpec spec;  // 64^3 at 2 mm
  spec.rng_seed = seed;
  std::mt19937_64 rng(7000 + seed);
  for (int k = 0; k < 3; ++k) {
    const Point3 c{spec.body_center.x + testing::uniform(rng, -20, 20), spec.body_center.y + testing::uniform(rng, -12, 12),
                   spec.body_center.z + testing::uniform(rng, -8, 8)};
    spec.lesions.push_back({c, testing::uniform(rng, 4, 7), testing::uniform(rng, 80, 150),
                            k == 2 ? LesionClass::NonTarget : LesionClass::Target, ""});
  }
  return spec;
}

struct RegistrationRun {
  Phantom fixed, moving;
  RigidTransform truth;  // moving(x) = fixed(truth(x))
  RegistrationResult result;
  double seconds = 0;
};

RegistrationRun run_registration(std::uint64_t seed) {
  RegistrationRun r;
  const PhantomSpec spec = registration_phantom(seed);
  std::mt19937_64 rng(8000 + seed);
  r.truth.angles = {testing::uniform(rng, -10, 10) * kDeg, testing::uniform(rng, -10, 10) * kDeg,
                    testing::uniform(rng, -10, 10) * kDeg};
  Point3 t{testing::uniform(rng, -1, 1), testing::uniform(rng, -1, 1), testing::uniform(rng, -1, 1)};
  r.truth.translation = (testing::uniform(rng, 0, 20) / norm(t)) * t;
  r.truth.center = spec.body_center;
  r.fixed = generate_phantom(spec);
  r.moving = transform_phantom(r.fixed.volume, r.fixed.truth, r.truth, spec.grid);
  r.moving.volume = add_noise(r.moving.volume, spec.noise_sigma, 9000 + seed);
  const auto start = Clock::now();
  r.result = register_volumes(r.fixed.volume, r.moving.volume, RegistrationConfig{});
  r.seconds = seconds_since(start);
  return r;
}

const std::vector<RegistrationRun>& registration_runs() {
  static const std::vector<RegistrationRun> runs = [] {
    std::vector<RegistrationRun> out;
    for (std::uint64_t seed = 0; seed < 10; ++seed) out.push_back(run_registration(seed));
    return out;
  }();
  return runs;
}

Outcome criterion_registration() {
  int good = 0;
  double slowest = 0, worst_dice = 1;
  std::ostringstream d;
  for (const auto& r : registration_runs()) {
    const RigidTransform expected = invert_transform(r.truth);
    const RigidTransform e = r.result.transform.recentered(expected.center);
    const double da = std::max({std::abs(e.angles.a1 - expected.angles.a1), std::abs(e.angles.a2 - expected.angles.a2),
                                std::abs(e.angles.a3 - expected.angles.a3)}) / kDeg;
    const Point3 dt = e.translation - expected.translation;
    const double dm = std::max({std::abs(dt.x), std::abs(dt.y), std::abs(dt.z)});
    const Volume resampled = resample(r.moving.volume, r.result.transform, r.fixed.volume.grid(),
                                      r.moving.volume.intensity_range()[0]);
    const double dc = dice(preprocess_mask(r.fixed.volume, -300), preprocess_mask(resampled, -300));
    const bool ok = da <= 1.0 && dm <= 1.0 && dc >= 0.95 && r.seconds < 60.0;
    good += ok;
    slowest = std::max(slowest, r.seconds);
    worst_dice = std::min(worst_dice, dc);
    std::fprintf(stderr, "  registration: %.3f deg, %.3f mm, dice %.4f, %.1f s\n", da, dm, dc, r.seconds);
  }
  d << good << "/10 seeds within 1 deg / 1 mm with Dice >= 0.95 and < 60 s (slowest " << slowest
    << " s, lowest Dice " << worst_dice << ")";
  return {good >= 9 && slowest < 60.0, d.str()};
}

Outcome criterion_inverse() {
  std::mt19937_64 rng(1005);
  double worst_round = 0, worst_lesion = 0;
  for (int n = 0; n < 100; ++n) {
    RigidTransform t{{testing::uniform(rng, -3, 3), testing::uniform(rng, -1.5, 1.5), testing::uniform(rng, -3, 3)},
                     {testing::uniform(rng, -50, 50), testing::uniform(rng, -50, 50), testing::uniform(rng, -50, 50)},
                     {testing::uniform(rng, 0, 128), testing::uniform(rng, 0, 128), testing::uniform(rng, 0, 128)}};
    const Point3 p{testing::uniform(rng, -200, 200), testing::uniform(rng, -200, 200), testing::uniform(rng, -200, 200)};
    worst_round = std::max(worst_round, distance(apply_transform(invert_transform(t), apply_transform(t, p)), p));
  }
  for (const auto& r : registration_runs()) {
    const auto mapped = map_lesion_centroids(r.result, r.moving.truth.rows());
    for (std::size_t i = 0; i < mapped.size(); ++i)
      worst_lesion = std::max(worst_lesion, distance(mapped[i].centroid, r.fixed.truth.rows()[i].centroid));
  }
  std::ostringstream d;
  d << "round trip max " << worst_round << " mm over 100 points, lesion mapping max " << worst_lesion << " mm";
  return {worst_round <= 1e-9 && worst_lesion <= 1.5, d.str()};
}

// ---- 6 and 8: longitudinal phantom tracking

struct TrackingRun {
  Study study;
  std::filesystem::path dir;
  PatientRun run;
};

TrackingRun track_study(std::uint64_t seed) {
  StudySpec spec;
  spec.seed = seed;
  TrackingRun t;
  t.study = generate_study(spec, default_study_lesions());
  t.dir = testing::scratch_dir("acceptance_study_" + std::to_string(seed));
  write_study(t.study, spec.patient_id, t.dir);
  const auto table = load_annotations(t.dir / "annotations.csv");
  t.run = run_patient(build_dataset(table, spec.patient_id, directory_volume_loader(t.dir / "volumes")),
                      PipelineConfig{});
  return t;
}

Outcome criterion_tracking() {
  int good = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto t = track_study(seed);
    std::map<std::string, std::size_t> truth_of;
    const auto key = [](const LesionAnnotation& a) {
      return a.timepoint_id + "/" + a.series_id + "/" + a.reader_id + "/" + a.source_label;
    };
    for (std::size_t r = 0; r < t.study.annotations.size(); ++r)
      truth_of[key(t.study.annotations.rows()[r])] = t.study.truth_lesion_of_row[r];
    // Correct membership: each track is exactly one true lesion's full set of rows.
    std::map<std::size_t, std::size_t> rows_per_lesion;
    for (const auto l : t.study.truth_lesion_of_row) ++rows_per_lesion[l];
    bool membership = t.run.registry.tracks.size() == 5;
    std::set<std::size_t> covered;
    for (const auto& track : t.run.registry.tracks) {
      std::set<std::size_t> ls;
      for (const auto& o : track.observations) ls.insert(truth_of.at(key(o.annotation)));
      membership = membership && ls.size() == 1 && track.observations.size() == rows_per_lesion[*ls.begin()] &&
                   covered.insert(*ls.begin()).second;
    }
    const auto score = score_patient(t.run.registry, load_tracks(t.dir / "truth.json"));
    const bool ok = membership && score.missed == 0 && score.false_reported == 0;
    good += ok;
    std::fprintf(stderr, "  tracking seed %llu: %zu tracks, MI %d, F %d%s\n", (unsigned long long)seed,
                 t.run.registry.tracks.size(), score.missed, score.false_reported, ok ? "" : " (wrong grouping)");
  }
  return {good == 10, std::to_string(good) + "/10 seeds give 5 correct tracks with MI = F = 0"};
}

Outcome criterion_determinism() {
  const auto a = track_study(42);
  const auto b = track_study(42);
  save_tracks(a.run.registry, a.dir / "tracks.json");
  save_tracks(b.run.registry, b.dir / "tracks.json");
  const auto x = testing::read_bytes(a.dir / "tracks.json");
  const auto y = testing::read_bytes(b.dir / "tracks.json");
  return {!x.empty() && x == y, std::to_string(x.size()) + " bytes, " + (x == y ? "identical" : "different")};
}

// ---- 7: evaluation table

Outcome criterion_table() {
  const auto r = aggregate(table1_fixture());
  std::ostringstream d;
  d << "U " << r.total_unique << ", true " << r.total_true << ", rate " << 100.0 * r.overestimation_rate
    << "%, failures " << r.failed_patients << "/" << r.patients.size();
  const bool ok = r.total_unique == 65 && r.total_true == 62 && std::abs(100.0 * r.overestimation_rate - 4.84) <= 0.01 &&
                  r.failed_patients == 2 && r.patients.size() == 25;
  return {ok, d.str()};
}

// ---- 9: MI ordering

Outcome criterion_mi_ordering() {
  int good = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const PhantomSpec spec = registration_phantom(100 + seed);
    const auto p = generate_phantom(spec);
    const MattesMutualInformation mi(p.volume, p.volume, 50, 0.1, seed, 0);
    const double at_identity = mi.evaluate(RigidTransform{});
    std::mt19937_64 rng(200 + seed);
    bool all = true;
    for (int n = 0; n < 20; ++n) {
      RigidTransform t;
      t.center = spec.body_center;
      Point3 dir{testing::uniform(rng, -1, 1), testing::uniform(rng, -1, 1), testing::uniform(rng, -1, 1)};
      t.translation = (testing::uniform(rng, 2.0, 8.0) * spec.grid.spacing.x / norm(dir)) * dir;
      t.angles = {testing::uniform(rng, -0.1, 0.1), testing::uniform(rng, -0.1, 0.1), testing::uniform(rng, -0.1, 0.1)};
      all = all && at_identity < mi.evaluate(t);
    }
    good += all;
  }
  return {good == 5, std::to_string(good) + "/5 seeds with identity below all 20 perturbations"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"assignment equals exhaustive minimum", criterion_assignment},
      {"threshold semantics", criterion_thresholds},
      {"rotation matrix conformance", criterion_rotation},
      {"registration recovery", criterion_registration},
      {"inverse mapping fidelity", criterion_inverse},
      {"end-to-end tracking", criterion_tracking},
      {"evaluation table totals", criterion_table},
      {"determinism", criterion_determinism},
      {"MI metric ordering", criterion_mi_ordering},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s criterion %zu: %s (%s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
