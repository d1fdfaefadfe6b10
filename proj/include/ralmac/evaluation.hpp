#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "ralmac/matching.hpp"

namespace ralmac {

/// Target-lesion scores for one patient.
struct PatientScore {
  std::string patient_id;
  int unique_reported = 0;  // U
  int missed = 0;           // MI
  int false_reported = 0;   // F
  int true_count = 0;       // U + MI - F
  int reader1 = 0;          // R1
  int reader2 = 0;          // R2
  int aligned = 0;
  int misaligned = 0;       // M/X/N

  bool failed() const { return missed + false_reported > 0; }
};

/// U, MI and F of algorithm tracks against validated truth tracks. Each truth
/// lesion is paired with at most one algorithm track (maximum overlap
/// matching); unpaired truth lesions count as MI and unpaired algorithm
/// tracks as F, so U + MI - F equals the truth lesion count. Only targets are
/// scored. Throws InputMismatch when a tracked annotation is absent in truth.
PatientScore score_patient(const TrackRegistry& algorithm, const TrackRegistry& truth);

struct ReaderAlignment {
  int reader1 = 0;
  int reader2 = 0;
  int aligned = 0;
  int misaligned = 0;
};

/// Target counts per reader (readers ordered by id) against the truth
/// grouping. A true lesion is aligned when both readers reported it with the
/// same labels; otherwise each true lesion reported by only one reader, or by
/// both under different labels, adds one to M/X/N. With one reader:
/// R2 = Align = 0 and M/X/N = R1.
ReaderAlignment reader_alignment(const std::vector<LesionAnnotation>& annotations, const TrackRegistry& truth);

struct CohortReport {
  std::vector<PatientScore> patients;
  int total_unique = 0;
  int total_missed = 0;
  int total_false = 0;
  int total_true = 0;
  int total_reader1 = 0;
  int total_reader2 = 0;
  int total_aligned = 0;
  int total_misaligned = 0;
  double overestimation_rate = 0.0;  // (total_U - total_true) / total_true
  int failed_patients = 0;
  double failure_fraction = 0.0;
};

CohortReport aggregate(const std::vector<PatientScore>& scores);

/// 25-patient evaluation table (U, MI, F, R1, R2, Align, M/X/N per subject).
std::vector<PatientScore> table1_fixture();

nlohmann::json to_json(const PatientScore& s);
nlohmann::json to_json(const CohortReport& r);

}  // namespace ralmac
