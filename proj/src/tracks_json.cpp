#include "ralmac/tracks_json.hpp"

#include <algorithm>
#include <fstream>

#include "ralmac/errors.hpp"

namespace ralmac {

using nlohmann::json;

json point_to_json(const Point3& p) { return json::array({p.x, p.y, p.z}); }

Point3 point_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3 || !j[0].is_number() || !j[1].is_number() || !j[2].is_number()) {
    throw ParseError("expected a 3-element numeric array, got " + j.dump());
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json transform_to_json(const RigidTransform& t) {
  return {{"angles_rad", json::array({t.angles.a1, t.angles.a2, t.angles.a3})},
          {"translation_mm", point_to_json(t.translation)},
          {"center_mm", point_to_json(t.center)}};
}

RigidTransform transform_from_json(const json& j) {
  try {
    const Point3 a = point_from_json(j.at("angles_rad"));
    return {{a.x, a.y, a.z}, point_from_json(j.at("translation_mm")), point_from_json(j.at("center_mm"))};
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad transform JSON: ") + e.what());
  }
}

json tracks_to_json(const TrackRegistry& registry) {
  std::vector<const LesionTrack*> ordered;
  for (const auto& t : registry.tracks) ordered.push_back(&t);
  std::sort(ordered.begin(), ordered.end(), [](const LesionTrack* a, const LesionTrack* b) {
    const auto ka = parse_canonical_name(a->canonical_name);
    const auto kb = parse_canonical_name(b->canonical_name);
    if (ka && kb) return *ka < *kb;
    return a->canonical_name < b->canonical_name;
  });
  json tracks = json::array();
  for (const LesionTrack* t : ordered) {
    json obs = json::array();
    for (const auto& o : t->observations) {
      json jo = {{"reader", o.annotation.reader_id},
                 {"series", o.annotation.series_id},
                 {"timepoint", o.annotation.timepoint_id},
                 {"source_label", o.annotation.source_label},
                 {"centroid_mm", point_to_json(o.annotation.centroid)},
                 {"mapped_centroid_mm", point_to_json(o.mapped_centroid)}};
      if (o.unregistered) jo["unregistered"] = true;
      obs.push_back(std::move(jo));
    }
    tracks.push_back({{"name", t->canonical_name},
                      {"class", std::string(to_string(t->lesion_class))},
                      {"reference_centroid_mm", point_to_json(t->reference_centroid)},
                      {"observations", std::move(obs)}});
  }
  return {{"patient_id", registry.patient_id}, {"tracks", std::move(tracks)}};
}

TrackRegistry tracks_from_json(const json& doc) {
  TrackRegistry reg;
  try {
    reg.patient_id = doc.value("patient_id", std::string{});
    for (const auto& jt : doc.at("tracks")) {
      LesionTrack t;
      t.canonical_name = jt.at("name").get<std::string>();
      const auto parsed = parse_canonical_name(t.canonical_name);
      if (!parsed) throw ParseError("track name '" + t.canonical_name + "' is not G<k> or NG<k>");
      const auto cls = parse_lesion_class(jt.at("class").get<std::string>());
      if (!cls) throw ParseError("unknown class in track " + t.canonical_name);
      if (*cls != parsed->first) throw ParseError("track " + t.canonical_name + " name/class mismatch");
      t.lesion_class = *cls;
      for (const auto& jo : jt.at("observations")) {
        Observation o;
        o.annotation.patient_id = reg.patient_id;
        o.annotation.reader_id = jo.at("reader").get<std::string>();
        o.annotation.series_id = jo.at("series").get<std::string>();
        o.annotation.timepoint_id = jo.at("timepoint").get<std::string>();
        o.annotation.source_label = jo.at("source_label").get<std::string>();
        o.annotation.lesion_class = t.lesion_class;
        o.annotation.centroid = point_from_json(jo.at("centroid_mm"));
        o.mapped_centroid = jo.contains("mapped_centroid_mm") ? point_from_json(jo.at("mapped_centroid_mm"))
                                                              : o.annotation.centroid;
        o.unregistered = jo.value("unregistered", false);
        t.observations.push_back(std::move(o));
      }
      if (jt.contains("reference_centroid_mm")) {
        t.reference_centroid = point_from_json(jt.at("reference_centroid_mm"));
      } else {
        t.refresh_reference_centroid();
      }
      int& next = t.lesion_class == LesionClass::Target ? reg.next_target_index : reg.next_nontarget_index;
      next = std::max(next, parsed->second + 1);
      if (reg.find(t.canonical_name)) throw ParseError("duplicate track name " + t.canonical_name);
      reg.tracks.push_back(std::move(t));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad tracks JSON: ") + e.what());
  }
  return reg;
}

TrackRegistry load_tracks(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return tracks_from_json(doc);
}

void save_tracks(const TrackRegistry& registry, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << tracks_to_json(registry).dump(2) << '\n';
}

}  // namespace ralmac
