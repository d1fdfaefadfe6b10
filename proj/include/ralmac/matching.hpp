#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "ralmac/assignment.hpp"
#include "ralmac/lesion.hpp"

namespace ralmac {

struct MatchConfig {
  double target_threshold_mm = 40.0;
  double nontarget_threshold_mm = 50.0;

  double threshold_for(LesionClass c) const {
    return c == LesionClass::Target ? target_threshold_mm : nontarget_threshold_mm;
  }
  /// Throws SpecError unless both thresholds are positive.
  void validate() const;
};

/// One Hungarian pair, with the distance that the threshold was tested on.
struct MatchedPair {
  std::size_t a = 0;  // index into side A
  std::size_t b = 0;  // index into side B
  double distance_mm = 0.0;
};

/// Result for one lesion class. Indices refer to the caller's full side-A and
/// side-B lists, not per-class sublists.
struct ClassCorrespondence {
  LesionClass lesion_class = LesionClass::Target;
  double threshold_mm = 0.0;
  std::vector<MatchedPair> matched;
  std::vector<MatchedPair> dissolved;  // proposed by the solver, rejected by the threshold
  std::vector<std::size_t> unmatched_a;
  std::vector<std::size_t> unmatched_b;
};

struct Correspondence {
  ClassCorrespondence target;
  ClassCorrespondence non_target;

  std::vector<MatchedPair> all_matched() const;
  std::vector<std::size_t> all_unmatched_a() const;
  std::vector<std::size_t> all_unmatched_b() const;
};

/// Solve-then-threshold matching run separately per class.
Correspondence match_centroids(const std::vector<LesionClass>& classes_a, const std::vector<Point3>& centroids_a,
                               const std::vector<LesionClass>& classes_b, const std::vector<Point3>& centroids_b,
                               const MatchConfig& cfg);

Correspondence match_lesions(const std::vector<LesionAnnotation>& set_a, const std::vector<LesionAnnotation>& set_b,
                             const MatchConfig& cfg);

/// Per-patient set of canonical tracks plus the next free index per class.
struct TrackRegistry {
  std::string patient_id;
  std::vector<LesionTrack> tracks;  // creation order
  int next_target_index = 1;
  int next_nontarget_index = 1;

  const LesionTrack* find(const std::string& name) const;
  std::size_t observation_count() const;
  /// Opens a new track named with the next free index of its class.
  LesionTrack& open_track(LesionClass c, std::vector<Observation> observations);
  friend bool operator==(const TrackRegistry&, const TrackRegistry&) = default;
};

/// Wraps annotations as one-observation, unnamed tracks whose mapped centroid
/// is the annotation centroid.
std::vector<LesionTrack> as_candidates(const std::vector<LesionAnnotation>& annotations);

/// Matches candidate groups (side B) against the registry's tracks (side A)
/// using the registry reference centroids and candidate reference centroids.
Correspondence match_into_registry(const TrackRegistry& registry, const std::vector<LesionTrack>& candidates,
                                   const MatchConfig& cfg);

/// Thrown when a correspondence claims one side-B item twice.
class CorrespondenceDefect : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Matched candidates join their side-A track (observations appended,
/// reference centroid re-averaged); unmatched candidates open new tracks in
/// ascending (timepoint, series, reader, label) order of their earliest
/// observation; unmatched registry tracks persist unchanged.
TrackRegistry assign_names(const Correspondence& corr, const TrackRegistry& registry,
                           const std::vector<LesionTrack>& candidates);

}  // namespace ralmac
