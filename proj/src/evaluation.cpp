#include "ralmac/evaluation.hpp"

#include <algorithm>
#include <set>

#include "ralmac/errors.hpp"

namespace ralmac {

namespace {

using AnnotationKey = std::tuple<std::string, std::string, std::string, std::string>;

AnnotationKey key_of(const LesionAnnotation& a) {
  return {a.timepoint_id, a.series_id, a.reader_id, a.source_label};
}

std::vector<const LesionTrack*> targets(const TrackRegistry& r) {
  std::vector<const LesionTrack*> out;
  for (const auto& t : r.tracks) {
    if (t.lesion_class == LesionClass::Target) out.push_back(&t);
  }
  return out;
}

std::map<AnnotationKey, std::size_t> truth_index(const std::vector<const LesionTrack*>& truth) {
  std::map<AnnotationKey, std::size_t> index;
  for (std::size_t l = 0; l < truth.size(); ++l) {
    for (const auto& o : truth[l]->observations) {
      if (!index.emplace(key_of(o.annotation), l).second) {
        throw InputMismatch("annotation " + o.annotation.source_label + " belongs to two truth lesions");
      }
    }
  }
  return index;
}

}  // namespace

PatientScore score_patient(const TrackRegistry& algorithm, const TrackRegistry& truth) {
  const auto algo = targets(algorithm);
  const auto lesions = targets(truth);
  const auto index = truth_index(lesions);

  // overlap[a][l] = annotations of true lesion l inside algorithm track a
  std::vector<std::vector<double>> overlap(algo.size(), std::vector<double>(lesions.size(), 0.0));
  double max_overlap = 0.0;
  for (std::size_t a = 0; a < algo.size(); ++a) {
    for (const auto& o : algo[a]->observations) {
      const auto it = index.find(key_of(o.annotation));
      if (it == index.end()) {
        throw InputMismatch("tracked annotation (" + o.annotation.timepoint_id + ", " + o.annotation.series_id +
                            ", " + o.annotation.reader_id + ", " + o.annotation.source_label +
                            ") is absent from truth");
      }
      max_overlap = std::max(max_overlap, overlap[a][it->second] += 1.0);
    }
  }
  // Maximum-overlap pairing as a min-cost assignment on (max - overlap).
  std::vector<double> costs;
  for (const auto& row : overlap) {
    for (double v : row) costs.push_back(max_overlap - v);
  }
  const Assignment pairing = solve_assignment(CostMatrix(algo.size(), lesions.size(), std::move(costs)));
  int represented = 0;
  for (const auto& [a, l] : pairing.pairs) {
    if (overlap[a][l] > 0.0) ++represented;
  }

  PatientScore s;
  s.patient_id = algorithm.patient_id.empty() ? truth.patient_id : algorithm.patient_id;
  s.unique_reported = static_cast<int>(algo.size());
  s.missed = static_cast<int>(lesions.size()) - represented;
  s.false_reported = s.unique_reported - represented;
  s.true_count = s.unique_reported + s.missed - s.false_reported;
  return s;
}

ReaderAlignment reader_alignment(const std::vector<LesionAnnotation>& annotations, const TrackRegistry& truth) {
  const auto lesions = targets(truth);
  const auto index = truth_index(lesions);
  std::set<std::string> reader_ids;
  for (const auto& a : annotations) {
    if (a.lesion_class == LesionClass::Target) reader_ids.insert(a.reader_id);
  }
  const std::vector<std::string> readers(reader_ids.begin(), reader_ids.end());

  // labels[r][l] = labels reader r used for true lesion l
  std::vector<std::map<std::size_t, std::set<std::string>>> labels(std::max<std::size_t>(readers.size(), 2));
  for (const auto& a : annotations) {
    if (a.lesion_class != LesionClass::Target) continue;
    const auto it = index.find(key_of(a));
    if (it == index.end()) throw InputMismatch("annotation " + a.source_label + " is absent from truth");
    const auto r = static_cast<std::size_t>(std::find(readers.begin(), readers.end(), a.reader_id) - readers.begin());
    labels[std::min<std::size_t>(r, 1)][it->second].insert(a.source_label);
  }
  // TODO: readers beyond the second are folded into R2; report per-reader columns if such data shows up.

  ReaderAlignment out;
  out.reader1 = static_cast<int>(labels[0].size());
  out.reader2 = static_cast<int>(labels[1].size());
  std::set<std::size_t> seen;
  for (const auto& [l, _] : labels[0]) seen.insert(l);
  for (const auto& [l, _] : labels[1]) seen.insert(l);
  for (std::size_t l : seen) {
    const auto a = labels[0].find(l);
    const auto b = labels[1].find(l);
    if (a != labels[0].end() && b != labels[1].end() && a->second == b->second) {
      ++out.aligned;
    } else {
      ++out.misaligned;
    }
  }
  return out;
}

CohortReport aggregate(const std::vector<PatientScore>& scores) {
  CohortReport r;
  r.patients = scores;
  for (const auto& s : scores) {
    r.total_unique += s.unique_reported;
    r.total_missed += s.missed;
    r.total_false += s.false_reported;
    r.total_true += s.true_count;
    r.total_reader1 += s.reader1;
    r.total_reader2 += s.reader2;
    r.total_aligned += s.aligned;
    r.total_misaligned += s.misaligned;
    if (s.failed()) ++r.failed_patients;
  }
  r.overestimation_rate =
      r.total_true > 0 ? double(r.total_unique - r.total_true) / double(r.total_true) : 0.0;
  r.failure_fraction = scores.empty() ? 0.0 : double(r.failed_patients) / double(scores.size());
  return r;
}

std::vector<PatientScore> table1_fixture() {
  // subject, U, MI, F, R1, R2, Align, M/X/N
  static constexpr int kRows[25][8] = {
      {1, 3, 0, 0, 2, 2, 1, 2},  {2, 2, 0, 0, 2, 2, 2, 0},  {3, 6, 0, 0, 5, 3, 1, 5},  {4, 3, 0, 0, 2, 2, 1, 2},
      {5, 1, 0, 0, 1, 0, 0, 1},  {6, 1, 0, 0, 1, 0, 0, 1},  {7, 2, 0, 0, 2, 0, 0, 2},  {8, 1, 0, 0, 1, 0, 0, 1},
      {9, 2, 0, 0, 2, 2, 2, 0},  {10, 4, 0, 0, 2, 2, 0, 4}, {11, 2, 0, 0, 2, 2, 2, 0}, {12, 6, 0, 1, 5, 2, 2, 3},
      {13, 4, 0, 2, 2, 0, 0, 2}, {14, 2, 0, 0, 2, 1, 1, 1}, {15, 1, 0, 0, 1, 1, 1, 0}, {16, 2, 0, 0, 2, 0, 0, 2},
      {17, 4, 0, 0, 4, 2, 2, 2}, {18, 2, 0, 0, 2, 1, 1, 1}, {19, 3, 0, 0, 2, 2, 1, 2}, {20, 2, 0, 0, 1, 1, 0, 2},
      {21, 1, 0, 0, 1, 0, 0, 1}, {22, 3, 0, 0, 3, 2, 2, 1}, {23, 2, 0, 0, 2, 2, 2, 0}, {24, 3, 0, 0, 1, 3, 1, 2},
      {25, 3, 0, 0, 3, 2, 1, 2},
  };
  std::vector<PatientScore> out;
  for (const auto& row : kRows) {
    PatientScore s;
    s.patient_id = std::to_string(row[0]);
    s.unique_reported = row[1];
    s.missed = row[2];
    s.false_reported = row[3];
    s.true_count = row[1] + row[2] - row[3];
    s.reader1 = row[4];
    s.reader2 = row[5];
    s.aligned = row[6];
    s.misaligned = row[7];
    out.push_back(s);
  }
  return out;
}

nlohmann::json to_json(const PatientScore& s) {
  return {{"patient_id", s.patient_id}, {"U", s.unique_reported}, {"MI", s.missed},
          {"F", s.false_reported},      {"true_count", s.true_count}, {"R1", s.reader1},
          {"R2", s.reader2},            {"Align", s.aligned},      {"MXN", s.misaligned}};
}

nlohmann::json to_json(const CohortReport& r) {
  nlohmann::json patients = nlohmann::json::array();
  for (const auto& s : r.patients) patients.push_back(to_json(s));
  return {{"patients", std::move(patients)},
          {"total_U", r.total_unique},
          {"total_MI", r.total_missed},
          {"total_F", r.total_false},
          {"total_true", r.total_true},
          {"total_R1", r.total_reader1},
          {"total_R2", r.total_reader2},
          {"total_Align", r.total_aligned},
          {"total_MXN", r.total_misaligned},
          {"overestimation_rate", r.overestimation_rate},
          {"failed_patients", r.failed_patients},
          {"failure_fraction", r.failure_fraction}};
}

}  // namespace ralmac
