#pragma once

#include <filesystem>

#include <json.hpp>

#include "ralmac/matching.hpp"
#include "ralmac/transform.hpp"

namespace ralmac {

/// {"patient_id": ..., "tracks": [{"name", "class", "reference_centroid_mm",
///   "observations": [{"reader", "series", "timepoint", "source_label",
///                     "centroid_mm", "mapped_centroid_mm"}]}]}
/// Tracks are emitted G1..Gj then NG1..NGi.
nlohmann::json tracks_to_json(const TrackRegistry& registry);
/// Throws ParseError on schema violations.
TrackRegistry tracks_from_json(const nlohmann::json& doc);

TrackRegistry load_tracks(const std::filesystem::path& path);
void save_tracks(const TrackRegistry& registry, const std::filesystem::path& path);

nlohmann::json point_to_json(const Point3& p);
Point3 point_from_json(const nlohmann::json& j);

nlohmann::json transform_to_json(const RigidTransform& t);
RigidTransform transform_from_json(const nlohmann::json& j);

}  // namespace ralmac
