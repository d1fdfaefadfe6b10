#include "ralmac/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "ralmac/errors.hpp"
#include "ralmac/tracks_json.hpp"
#include "ralmac/volume_io.hpp"

namespace ralmac {

using nlohmann::json;

RegistrationConfig registration_config_from_json(const json& j) {
  RegistrationConfig cfg;
  try {
    cfg.histogram_bins = j.value("histogram_bins", cfg.histogram_bins);
    cfg.sample_fraction = j.value("sample_fraction", cfg.sample_fraction);
    cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
    cfg.max_iterations = j.value("max_iterations", cfg.max_iterations);
    cfg.convergence_tolerance = j.value("convergence_tolerance", cfg.convergence_tolerance);
    cfg.convergence_window = j.value("convergence_window", cfg.convergence_window);
    cfg.shrink_factors = j.value("shrink_factors", cfg.shrink_factors);
    cfg.smoothing_sigmas = j.value("smoothing_sigmas", cfg.smoothing_sigmas);
    cfg.rng_seed = j.value("rng_seed", cfg.rng_seed);
    cfg.body_threshold = j.value("body_threshold", cfg.body_threshold);
    cfg.sampling_margin_mm = j.value("sampling_margin_mm", cfg.sampling_margin_mm);
    cfg.angle_step_rad = j.value("angle_step_rad", cfg.angle_step_rad);
    cfg.translation_step_mm = j.value("translation_step_mm", cfg.translation_step_mm);
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad registration config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

json registration_config_to_json(const RegistrationConfig& cfg) {
  return {{"histogram_bins", cfg.histogram_bins},
          {"sample_fraction", cfg.sample_fraction},
          {"learning_rate", cfg.learning_rate},
          {"max_iterations", cfg.max_iterations},
          {"convergence_tolerance", cfg.convergence_tolerance},
          {"convergence_window", cfg.convergence_window},
          {"shrink_factors", cfg.shrink_factors},
          {"smoothing_sigmas", cfg.smoothing_sigmas},
          {"rng_seed", cfg.rng_seed},
          {"body_threshold", cfg.body_threshold},
          {"sampling_margin_mm", cfg.sampling_margin_mm},
          {"angle_step_rad", cfg.angle_step_rad},
          {"translation_step_mm", cfg.translation_step_mm}};
}

PipelineConfig pipeline_config_from_json(const json& j) {
  PipelineConfig cfg;
  try {
    cfg.match.target_threshold_mm = j.value("target_threshold_mm", cfg.match.target_threshold_mm);
    cfg.match.nontarget_threshold_mm = j.value("nontarget_threshold_mm", cfg.match.nontarget_threshold_mm);
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad matching config: ") + e.what());
  }
  cfg.match.validate();
  cfg.registration = registration_config_from_json(j.contains("registration") ? j.at("registration") : j);
  return cfg;
}

namespace {

std::tuple<int, long long, std::string> timepoint_key(const std::string& id) {
  std::string lower;
  for (char c : id) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (lower.starts_with("screen") || lower.starts_with("baseline")) return {0, 0, id};
  const auto digit = std::find_if(id.begin(), id.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
  if (digit != id.end()) {
    long long n = 0;
    for (auto it = digit; it != id.end() && std::isdigit(static_cast<unsigned char>(*it)) && n < 1'000'000'000; ++it) {
      n = n * 10 + (*it - '0');
    }
    return {1, n, id};
  }
  return {2, 0, id};
}

json observation_ref(const LesionAnnotation& a) {
  return {{"timepoint", a.timepoint_id},
          {"series", a.series_id},
          {"reader", a.reader_id},
          {"source_label", a.source_label}};
}

json candidate_ref(const LesionTrack& t) {
  json refs = json::array();
  for (const auto& o : t.observations) refs.push_back(observation_ref(o.annotation));
  return refs;
}

void log_correspondence(AuditLog& log, const std::string& stage, const json& context, const Correspondence& corr,
                        const TrackRegistry& before, const std::vector<LesionTrack>& candidates) {
  for (const ClassCorrespondence* cc : {&corr.target, &corr.non_target}) {
    const auto emit = [&](const MatchedPair& p, const char* verdict) {
      json e = context;
      e["stage"] = stage;
      e["event"] = "pair";
      e["class"] = std::string(to_string(cc->lesion_class));
      e["track"] = before.tracks[p.a].canonical_name;
      e["candidate"] = candidate_ref(candidates[p.b]);
      e["distance_mm"] = p.distance_mm;
      e["threshold_mm"] = cc->threshold_mm;
      e["verdict"] = verdict;
      log.add(std::move(e));
    };
    for (const auto& p : cc->matched) emit(p, "retained");
    for (const auto& p : cc->dissolved) emit(p, "dissolved");
  }
}

void log_new_tracks(AuditLog& log, const std::string& stage, const json& context, const TrackRegistry& before,
                    const TrackRegistry& after) {
  for (std::size_t t = before.tracks.size(); t < after.tracks.size(); ++t) {
    json e = context;
    e["stage"] = stage;
    e["event"] = "new_track";
    e["track"] = after.tracks[t].canonical_name;
    e["candidate"] = candidate_ref(after.tracks[t]);
    log.add(std::move(e));
  }
}

TrackRegistry merge_candidates(const TrackRegistry& registry, const std::vector<LesionTrack>& candidates,
                               const MatchConfig& cfg, AuditLog& log, const std::string& stage, const json& context) {
  const Correspondence corr = match_into_registry(registry, candidates, cfg);
  log_correspondence(log, stage, context, corr, registry, candidates);
  TrackRegistry out = assign_names(corr, registry, candidates);
  log_new_tracks(log, stage, context, registry, out);
  return out;
}

/// Appends candidates as new tracks without matching.
TrackRegistry append_unmatched(const TrackRegistry& registry, const std::vector<LesionTrack>& candidates,
                               AuditLog& log, const std::string& stage, const json& context) {
  Correspondence corr;
  corr.target.lesion_class = LesionClass::Target;
  corr.non_target.lesion_class = LesionClass::NonTarget;
  for (std::size_t b = 0; b < candidates.size(); ++b) {
    (candidates[b].lesion_class == LesionClass::Target ? corr.target : corr.non_target).unmatched_b.push_back(b);
  }
  TrackRegistry out = assign_names(corr, registry, candidates);
  log_new_tracks(log, stage, context, registry, out);
  return out;
}

/// Candidate groups with every observation carried into the reference frame.
std::vector<LesionTrack> mapped_candidates(const TrackRegistry& local, const RigidTransform* moving_to_fixed,
                                           bool unregistered) {
  std::vector<LesionTrack> out;
  for (const auto& t : local.tracks) {
    LesionTrack c;
    c.lesion_class = t.lesion_class;
    c.observations = t.observations;
    for (auto& o : c.observations) {
      if (moving_to_fixed) o.mapped_centroid = apply_transform(*moving_to_fixed, o.mapped_centroid);
      o.unregistered = o.unregistered || unregistered;
    }
    c.refresh_reference_centroid();
    out.push_back(std::move(c));
  }
  return out;
}

json registration_event(const json& context, const RegistrationResult& r) {
  json e = context;
  e["event"] = "registration";
  e["transform"] = transform_to_json(r.transform);
  e["initial_transform"] = transform_to_json(r.initial_transform);
  e["final_metric"] = r.final_metric;
  e["iterations_per_level"] = r.iterations_per_level;
  e["converged"] = r.converged;
  return e;
}

enum class Alignment { Registered, Identity, Failed };

/// Registers `moving` onto `fixed` (when both exist) and returns the
/// moving-to-fixed point map.
Alignment align(const std::optional<Volume>& fixed, const std::optional<Volume>& moving,
                const RegistrationConfig& cfg, json context, AuditLog& log, RigidTransform& moving_to_fixed) {
  moving_to_fixed = RigidTransform{};
  if (!fixed || !moving) {
    context["event"] = "identity_mapping";
    context["reason"] = !moving ? "moving volume missing" : "reference volume missing";
    log.add(std::move(context));
    return Alignment::Identity;
  }
  try {
    const RegistrationResult r = register_volumes(*fixed, *moving, cfg);
    log.add(registration_event(context, r));
    moving_to_fixed = invert_transform(r.transform);
    return Alignment::Registered;
  } catch (const Error& e) {
    context["event"] = "registration_failed";
    context["error"] = e.what();
    log.add(std::move(context));
    return Alignment::Failed;
  }
}

}  // namespace

bool timepoint_before(const std::string& a, const std::string& b) { return timepoint_key(a) < timepoint_key(b); }

PatientDataset build_dataset(const AnnotationTable& table, const std::string& patient_id, const VolumeLoader& loader) {
  PatientDataset ds;
  ds.patient_id = patient_id;
  std::map<std::string, std::map<std::string, SeriesData>> tree;
  for (const auto& a : table.for_patient(patient_id)) {
    auto& s = tree[a.timepoint_id][a.series_id];
    s.series_id = a.series_id;
    s.by_reader[a.reader_id].push_back(a);
  }
  std::vector<std::string> tps;
  for (const auto& [tp, _] : tree) tps.push_back(tp);
  std::stable_sort(tps.begin(), tps.end(), timepoint_before);
  for (const auto& tp : tps) {
    TimepointData t;
    t.timepoint_id = tp;
    for (auto& [sid, s] : tree[tp]) {
      if (loader) s.volume = loader(patient_id, tp, sid);
      t.series.push_back(std::move(s));
    }
    ds.timepoints.push_back(std::move(t));
  }
  return ds;
}

VolumeLoader directory_volume_loader(const std::filesystem::path& dir) {
  return [dir](const std::string& patient, const std::string& tp, const std::string& series) -> std::optional<Volume> {
    const auto stem = dir / (patient + "_" + tp + "_" + series);
    if (!std::filesystem::exists(header_path_for(stem)) || !std::filesystem::exists(raw_path_for(stem))) {
      return std::nullopt;
    }
    return load_volume(stem);
  };
}

std::string AuditLog::to_jsonl() const {
  std::string out;
  for (const auto& e : events) out += e.dump() + '\n';
  return out;
}

TrackRegistry match_within_series(const SeriesData& series, const MatchConfig& cfg, TrackRegistry registry,
                                  AuditLog& log) {
  for (const auto& [reader, annotations] : series.by_reader) {
    json context = {{"series", series.series_id}, {"reader", reader}};
    if (!annotations.empty()) context["timepoint"] = annotations.front().timepoint_id;
    registry = merge_candidates(registry, as_candidates(annotations), cfg, log, "within_series", context);
  }
  return registry;
}

TimepointResolution match_across_series(const TimepointData& timepoint, const PipelineConfig& cfg,
                                        const std::string& patient_id, AuditLog& log) {
  TimepointResolution out;
  out.registry.patient_id = patient_id;
  if (timepoint.series.empty()) return out;
  const auto ref = std::find_if(timepoint.series.begin(), timepoint.series.end(),
                                [](const SeriesData& s) { return s.volume.has_value(); });
  out.reference = ref != timepoint.series.end() ? &*ref : &timepoint.series.front();
  out.registry = match_within_series(*out.reference, cfg.match, std::move(out.registry), log);

  for (const auto& s : timepoint.series) {
    if (&s == out.reference) continue;
    TrackRegistry local;
    local.patient_id = patient_id;
    local = match_within_series(s, cfg.match, std::move(local), log);
    const json context = {{"stage", "across_series"},
                          {"timepoint", timepoint.timepoint_id},
                          {"fixed_series", out.reference->series_id},
                          {"moving_series", s.series_id}};
    RigidTransform to_ref;
    const Alignment how = align(out.reference->volume, s.volume, cfg.registration, context, log, to_ref);
    if (how == Alignment::Failed) {
      out.registry = append_unmatched(out.registry, mapped_candidates(local, nullptr, true), log, "across_series",
                                      context);
    } else {
      out.registry = merge_candidates(out.registry, mapped_candidates(local, &to_ref, false), cfg.match, log,
                                      "across_series", context);
    }
  }
  return out;
}

TrackRegistry match_across_timepoints(const PatientDataset& dataset, const PipelineConfig& cfg, AuditLog& log) {
  TrackRegistry global;
  global.patient_id = dataset.patient_id;
  if (dataset.timepoints.empty()) return global;

  std::vector<TimepointResolution> resolved;
  for (const auto& tp : dataset.timepoints) resolved.push_back(match_across_series(tp, cfg, dataset.patient_id, log));

  // Global fixed image: the first timepoint's reference volume, else the first available one.
  std::size_t ref_tp = resolved.size();
  for (std::size_t t = 0; t < resolved.size(); ++t) {
    if (resolved[t].reference && resolved[t].reference->volume) {
      ref_tp = t;
      break;
    }
  }
  if (ref_tp != 0) {
    log.add({{"stage", "across_timepoints"},
             {"event", "warning"},
             {"message", ref_tp == resolved.size() ? "no volumes available; all timepoints use identity mapping"
                                                    : "first timepoint has no volume; using " +
                                                          dataset.timepoints[ref_tp].timepoint_id + " as reference"}});
  }
  const std::optional<Volume> no_volume;
  const std::optional<Volume>& fixed = ref_tp < resolved.size() ? resolved[ref_tp].reference->volume : no_volume;

  for (std::size_t t = 0; t < resolved.size(); ++t) {
    const TrackRegistry& local = resolved[t].registry;
    const json context = {{"stage", "across_timepoints"},
                          {"fixed_timepoint", ref_tp < resolved.size() ? dataset.timepoints[ref_tp].timepoint_id : ""},
                          {"moving_timepoint", dataset.timepoints[t].timepoint_id}};
    if (t == 0) {
      // The first timepoint seeds the registry; its local names are final.
      RigidTransform to_ref;
      Alignment how = Alignment::Identity;
      if (t != ref_tp) {
        const auto& moving = resolved[t].reference ? resolved[t].reference->volume : no_volume;
        how = align(fixed, moving, cfg.registration, context, log, to_ref);
      }
      const auto candidates = mapped_candidates(local, &to_ref, how == Alignment::Failed);
      global = append_unmatched(global, candidates, log, "across_timepoints", context);
      continue;
    }
    RigidTransform to_ref;
    Alignment how = Alignment::Identity;
    if (t != ref_tp) {
      const auto& moving = resolved[t].reference ? resolved[t].reference->volume : no_volume;
      how = align(fixed, moving, cfg.registration, context, log, to_ref);
    }
    if (how == Alignment::Failed) {
      global = append_unmatched(global, mapped_candidates(local, nullptr, true), log, "across_timepoints", context);
    } else {
      global = merge_candidates(global, mapped_candidates(local, &to_ref, false), cfg.match, log,
                                "across_timepoints", context);
    }
  }
  return global;
}

PatientRun run_patient(const PatientDataset& dataset, const PipelineConfig& cfg) {
  PatientRun run;
  run.registry = match_across_timepoints(dataset, cfg, run.log);
  for (const auto& e : run.log.events) {
    const auto kind = e.value("event", std::string{});
    if (kind == "warning" || kind == "registration_failed" || kind == "identity_mapping") {
      run.warnings.push_back(e.dump());
    }
  }
  return run;
}

}  // namespace ralmac
