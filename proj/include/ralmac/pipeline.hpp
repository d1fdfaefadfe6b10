#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ralmac/annotation_io.hpp"
#include "ralmac/matching.hpp"
#include "ralmac/registration.hpp"

namespace ralmac {

struct PipelineConfig {
  MatchConfig match;
  RegistrationConfig registration;
};

/// Reads matching thresholds and registration settings. Registration keys may
/// sit at top level or under "registration"; missing keys keep defaults.
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);
RegistrationConfig registration_config_from_json(const nlohmann::json& j);
nlohmann::json registration_config_to_json(const RegistrationConfig& cfg);

struct SeriesData {
  std::string series_id;
  std::optional<Volume> volume;
  std::map<std::string, std::vector<LesionAnnotation>> by_reader;
};

struct TimepointData {
  std::string timepoint_id;
  std::vector<SeriesData> series;  // ascending series_id
};

struct PatientDataset {
  std::string patient_id;
  std::vector<TimepointData> timepoints;  // chronological
};

/// Chronological order: Screening/Baseline first, then by the first number in
/// the id (Week8 < Week16), then lexicographically.
bool timepoint_before(const std::string& a, const std::string& b);

using VolumeLoader = std::function<std::optional<Volume>(const std::string& patient, const std::string& timepoint,
                                                         const std::string& series)>;

/// Builds the timepoint/series/reader hierarchy for one patient.
PatientDataset build_dataset(const AnnotationTable& table, const std::string& patient_id,
                             const VolumeLoader& loader = {});

/// Loader for `<dir>/<patient>_<timepoint>_<series>.hdr/.raw`; missing files yield nullopt.
VolumeLoader directory_volume_loader(const std::filesystem::path& dir);

/// Append-only JSON-lines decision log.
struct AuditLog {
  std::vector<nlohmann::json> events;
  void add(nlohmann::json event) { events.push_back(std::move(event)); }
  std::string to_jsonl() const;
};

/// Reader groups of one series matched in reader-id order (chained pairwise
/// when there are more than two readers). Centroids stay in the series frame.
TrackRegistry match_within_series(const SeriesData& series, const MatchConfig& cfg, TrackRegistry registry,
                                  AuditLog& log);

/// Timepoint-local grouping across series. The first series (by id) holding
/// a volume is the reference frame; the others are registered to it.
struct TimepointResolution {
  TrackRegistry registry;
  const SeriesData* reference = nullptr;
};

TimepointResolution match_across_series(const TimepointData& timepoint, const PipelineConfig& cfg,
                                        const std::string& patient_id, AuditLog& log);

/// Cumulative cross-timepoint matching in the first timepoint's reference frame.
TrackRegistry match_across_timepoints(const PatientDataset& dataset, const PipelineConfig& cfg, AuditLog& log);

struct PatientRun {
  TrackRegistry registry;
  AuditLog log;
  std::vector<std::string> warnings;
};

PatientRun run_patient(const PatientDataset& dataset, const PipelineConfig& cfg);

}  // namespace ralmac
