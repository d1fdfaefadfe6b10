#include "ralmac/matching.hpp"

#include <algorithm>
#include <numeric>

#include "ralmac/errors.hpp"

namespace ralmac {

void MatchConfig::validate() const {
  if (!(target_threshold_mm > 0.0) || !(nontarget_threshold_mm > 0.0)) {
    throw SpecError("matching thresholds must be positive");
  }
}

std::vector<MatchedPair> Correspondence::all_matched() const {
  auto out = target.matched;
  out.insert(out.end(), non_target.matched.begin(), non_target.matched.end());
  return out;
}

std::vector<std::size_t> Correspondence::all_unmatched_a() const {
  auto out = target.unmatched_a;
  out.insert(out.end(), non_target.unmatched_a.begin(), non_target.unmatched_a.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> Correspondence::all_unmatched_b() const {
  auto out = target.unmatched_b;
  out.insert(out.end(), non_target.unmatched_b.begin(), non_target.unmatched_b.end());
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

ClassCorrespondence match_class(LesionClass cls, const std::vector<LesionClass>& classes_a,
                                const std::vector<Point3>& centroids_a, const std::vector<LesionClass>& classes_b,
                                const std::vector<Point3>& centroids_b, double threshold) {
  std::vector<std::size_t> idx_a, idx_b;
  std::vector<Point3> pts_a, pts_b;
  for (std::size_t i = 0; i < classes_a.size(); ++i) {
    if (classes_a[i] == cls) {
      idx_a.push_back(i);
      pts_a.push_back(centroids_a[i]);
    }
  }
  for (std::size_t i = 0; i < classes_b.size(); ++i) {
    if (classes_b[i] == cls) {
      idx_b.push_back(i);
      pts_b.push_back(centroids_b[i]);
    }
  }
  const CostMatrix costs = CostMatrix::pairwise_distances(pts_a, pts_b);
  const Assignment solved = solve_assignment(costs);
  const Assignment kept = threshold_filter(solved, costs, threshold);

  ClassCorrespondence out;
  out.lesion_class = cls;
  out.threshold_mm = threshold;
  for (const auto& [r, c] : solved.pairs) {
    const MatchedPair pair{idx_a[r], idx_b[c], costs(r, c)};
    (costs(r, c) > threshold ? out.dissolved : out.matched).push_back(pair);
  }
  for (auto r : kept.unmatched_rows) out.unmatched_a.push_back(idx_a[r]);
  for (auto c : kept.unmatched_cols) out.unmatched_b.push_back(idx_b[c]);
  return out;
}

}  // namespace

Correspondence match_centroids(const std::vector<LesionClass>& classes_a, const std::vector<Point3>& centroids_a,
                               const std::vector<LesionClass>& classes_b, const std::vector<Point3>& centroids_b,
                               const MatchConfig& cfg) {
  cfg.validate();
  Correspondence corr;
  corr.target = match_class(LesionClass::Target, classes_a, centroids_a, classes_b, centroids_b,
                            cfg.target_threshold_mm);
  corr.non_target = match_class(LesionClass::NonTarget, classes_a, centroids_a, classes_b, centroids_b,
                                cfg.nontarget_threshold_mm);
  return corr;
}

Correspondence match_lesions(const std::vector<LesionAnnotation>& set_a, const std::vector<LesionAnnotation>& set_b,
                             const MatchConfig& cfg) {
  std::vector<LesionClass> ca, cb;
  std::vector<Point3> pa, pb;
  for (const auto& a : set_a) {
    ca.push_back(a.lesion_class);
    pa.push_back(a.centroid);
  }
  for (const auto& b : set_b) {
    cb.push_back(b.lesion_class);
    pb.push_back(b.centroid);
  }
  return match_centroids(ca, pa, cb, pb, cfg);
}

const LesionTrack* TrackRegistry::find(const std::string& name) const {
  const auto it = std::find_if(tracks.begin(), tracks.end(),
                               [&](const LesionTrack& t) { return t.canonical_name == name; });
  return it == tracks.end() ? nullptr : &*it;
}

std::size_t TrackRegistry::observation_count() const {
  return std::accumulate(tracks.begin(), tracks.end(), std::size_t{0},
                         [](std::size_t n, const LesionTrack& t) { return n + t.observations.size(); });
}

LesionTrack& TrackRegistry::open_track(LesionClass c, std::vector<Observation> observations) {
  int& next = c == LesionClass::Target ? next_target_index : next_nontarget_index;
  LesionTrack track;
  track.canonical_name = canonical_name(c, next++);
  track.lesion_class = c;
  track.observations = std::move(observations);
  track.refresh_reference_centroid();
  tracks.push_back(std::move(track));
  return tracks.back();
}

std::vector<LesionTrack> as_candidates(const std::vector<LesionAnnotation>& annotations) {
  std::vector<LesionTrack> out;
  out.reserve(annotations.size());
  for (const auto& a : annotations) {
    LesionTrack t;
    t.lesion_class = a.lesion_class;
    t.observations.push_back({a, a.centroid});
    t.reference_centroid = a.centroid;
    out.push_back(std::move(t));
  }
  return out;
}

Correspondence match_into_registry(const TrackRegistry& registry, const std::vector<LesionTrack>& candidates,
                                   const MatchConfig& cfg) {
  std::vector<LesionClass> ca, cb;
  std::vector<Point3> pa, pb;
  for (const auto& t : registry.tracks) {
    ca.push_back(t.lesion_class);
    pa.push_back(t.reference_centroid);
  }
  for (const auto& t : candidates) {
    cb.push_back(t.lesion_class);
    pb.push_back(t.reference_centroid);
  }
  return match_centroids(ca, pa, cb, pb, cfg);
}

namespace {

const LesionAnnotation& earliest(const LesionTrack& t) {
  return std::min_element(t.observations.begin(), t.observations.end(),
                          [](const Observation& x, const Observation& y) {
                            return naming_order_less(x.annotation, y.annotation);
                          })
      ->annotation;
}

}  // namespace

TrackRegistry assign_names(const Correspondence& corr, const TrackRegistry& registry,
                           const std::vector<LesionTrack>& candidates) {
  TrackRegistry out = registry;
  std::vector<char> claimed(candidates.size(), 0);
  for (const auto& pair : corr.all_matched()) {
    if (pair.a >= out.tracks.size() || pair.b >= candidates.size()) {
      throw CorrespondenceDefect("correspondence index out of range");
    }
    if (claimed[pair.b]) throw CorrespondenceDefect("candidate claimed by two pairs");
    claimed[pair.b] = 1;
    auto& track = out.tracks[pair.a];
    const auto& cand = candidates[pair.b];
    if (cand.lesion_class != track.lesion_class) throw CorrespondenceDefect("cross-class pair");
    track.observations.insert(track.observations.end(), cand.observations.begin(), cand.observations.end());
    track.refresh_reference_centroid();
  }

  std::vector<std::size_t> fresh;
  for (auto b : corr.all_unmatched_b()) {
    if (b >= candidates.size()) throw CorrespondenceDefect("correspondence index out of range");
    if (claimed[b]) throw CorrespondenceDefect("candidate both matched and unmatched");
    claimed[b] = 1;
    if (candidates[b].observations.empty()) throw CorrespondenceDefect("candidate without observations");
    fresh.push_back(b);
  }
  std::stable_sort(fresh.begin(), fresh.end(), [&](std::size_t x, std::size_t y) {
    return naming_order_less(earliest(candidates[x]), earliest(candidates[y]));
  });
  for (auto b : fresh) out.open_track(candidates[b].lesion_class, candidates[b].observations);
  return out;
}

}  // namespace ralmac
