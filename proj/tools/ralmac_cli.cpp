#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "ralmac/annotation_io.hpp"
#include "ralmac/errors.hpp"
#include "ralmac/evaluation.hpp"
#include "ralmac/image_ops.hpp"
#include "ralmac/matching.hpp"
#include "ralmac/pipeline.hpp"
#include "ralmac/registration.hpp"
#include "ralmac/synth.hpp"
#include "ralmac/tracks_json.hpp"
#include "ralmac/viz.hpp"
#include "ralmac/volume_io.hpp"

using nlohmann::json;
using namespace ralmac;

namespace {

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

LesionClass class_from(const json& j) {
  const auto text = j.value("class", std::string("target"));
  const auto c = parse_lesion_class(text);
  if (!c) throw ParseError("unknown lesion class: " + text);
  return *c;
}

Point3 parse_point(const std::string& s) {
  std::stringstream ss(s);
  Point3 p;
  char c1 = 0, c2 = 0;
  if (!(ss >> p.x >> c1 >> p.y >> c2 >> p.z) || c1 != ',' || c2 != ',') throw ParseError("expected x,y,z: " + s);
  return p;
}

json correspondence_json(const ClassCorrespondence& c, const std::vector<LesionAnnotation>& a,
                         const std::vector<LesionAnnotation>& b) {
  json j;
  j["class"] = to_string(c.lesion_class);
  j["threshold_mm"] = c.threshold_mm;
  const auto pairs = [&](const std::vector<MatchedPair>& list) {
    json out = json::array();
    for (const auto& m : list) {
      out.push_back({{"a", a[m.a].source_label}, {"b", b[m.b].source_label}, {"distance_mm", m.distance_mm}});
    }
    return out;
  };
  j["matched"] = pairs(c.matched);
  j["dissolved"] = pairs(c.dissolved);
  j["unmatched_a"] = json::array();
  for (auto i : c.unmatched_a) j["unmatched_a"].push_back(a[i].source_label);
  j["unmatched_b"] = json::array();
  for (auto i : c.unmatched_b) j["unmatched_b"].push_back(b[i].source_label);
  return j;
}

int cmd_match(const std::string& csv, const std::string& patient, const std::string& timepoint,
              const std::string& series, double target_mm, double nontarget_mm, const std::string& out) {
  MatchConfig cfg{target_mm, nontarget_mm};
  cfg.validate();
  const auto table = load_annotations(csv);
  std::map<std::string, std::vector<LesionAnnotation>> by_reader;
  for (const auto& a : table.rows()) {
    if (a.patient_id == patient && a.timepoint_id == timepoint && a.series_id == series) {
      by_reader[a.reader_id].push_back(a);
    }
  }
  json doc{{"patient_id", patient}, {"timepoint", timepoint}, {"series", series}, {"comparisons", json::array()}};
  if (by_reader.size() < 2) {
    std::cerr << "fewer than two readers for " << patient << "/" << timepoint << "/" << series << "\n";
  }
  // Consecutive reader pairs in id order.
  for (auto it = by_reader.begin(); it != by_reader.end() && std::next(it) != by_reader.end(); ++it) {
    const auto& [ra, a] = *it;
    const auto& [rb, b] = *std::next(it);
    const auto corr = match_lesions(a, b, cfg);
    doc["comparisons"].push_back({{"reader_a", ra},
                                  {"reader_b", rb},
                                  {"target", correspondence_json(corr.target, a, b)},
                                  {"non_target", correspondence_json(corr.non_target, a, b)}});
  }
  write_text(out, doc.dump(2) + "\n");
  return 0;
}

int cmd_register(const std::string& fixed_path, const std::string& moving_path, const std::string& config,
                 const std::string& out_transform, const std::string& out_resampled) {
  RegistrationConfig cfg;
  if (!config.empty()) cfg = registration_config_from_json(read_json(config));
  const Volume fixed = load_volume(fixed_path);
  const Volume moving = load_volume(moving_path);
  const auto res = register_volumes(fixed, moving, cfg);
  json j = transform_to_json(res.transform);
  j["initial"] = transform_to_json(res.initial_transform);
  j["final_metric"] = res.final_metric;
  j["iterations_per_level"] = res.iterations_per_level;
  j["converged_per_level"] = res.converged_per_level;
  j["converged"] = res.converged;
  j["used_principal_axes"] = res.used_principal_axes;
  j["config"] = registration_config_to_json(cfg);
  write_text(out_transform, j.dump(2) + "\n");
  if (!out_resampled.empty()) {
    save_volume(resample(moving, res.transform, fixed.grid(), moving.intensity_range()[0]), out_resampled);
  }
  std::cerr << "final metric " << res.final_metric << (res.converged ? " (converged)" : "") << "\n";
  return 0;
}

int cmd_track(const std::string& csv, const std::string& volumes, const std::string& patient,
              const std::string& config, const std::string& out, const std::string& audit) {
  PipelineConfig cfg;
  if (!config.empty()) cfg = pipeline_config_from_json(read_json(config));
  const auto table = load_annotations(csv);
  const auto dataset = build_dataset(table, patient, volumes.empty() ? VolumeLoader{} : directory_volume_loader(volumes));
  const auto run = run_patient(dataset, cfg);
  for (const auto& w : run.warnings) std::cerr << "warning: " << w << "\n";
  save_tracks(run.registry, out);
  if (!audit.empty()) write_text(audit, run.log.to_jsonl());
  return 0;
}

PhantomSpec phantom_spec_from_json(const json& j) {
  PhantomSpec spec;
  const auto point = [](const json& v) { return point_from_json(v); };
  if (j.contains("dims")) {
    const auto d = j.at("dims").get<std::vector<std::size_t>>();
    if (d.size() != 3) throw ParseError("dims needs 3 entries");
    spec.grid.dims = {d[0], d[1], d[2]};
  }
  if (j.contains("spacing")) spec.grid.spacing = point(j.at("spacing"));
  if (j.contains("origin")) spec.grid.origin = point(j.at("origin"));
  if (j.contains("body")) {
    const auto& b = j.at("body");
    if (b.contains("center")) spec.body_center = point(b.at("center"));
    if (b.contains("semi_axes")) spec.body_semi_axes = point(b.at("semi_axes"));
    spec.body_intensity = b.value("intensity", spec.body_intensity);
  }
  spec.background_intensity = j.value("background_intensity", spec.background_intensity);
  spec.noise_sigma = j.value("noise_sigma", spec.noise_sigma);
  spec.rng_seed = j.value("rng_seed", spec.rng_seed);
  spec.patient_id = j.value("patient_id", spec.patient_id);
  spec.timepoint_id = j.value("timepoint_id", spec.timepoint_id);
  spec.series_id = j.value("series_id", spec.series_id);
  spec.reader_id = j.value("reader_id", spec.reader_id);
  for (const auto& l : j.value("lesions", json::array())) {
    PhantomLesion lesion;
    lesion.center = point(l.at("center"));
    lesion.radius_mm = l.value("radius_mm", lesion.radius_mm);
    lesion.intensity = l.value("intensity", lesion.intensity);
    lesion.lesion_class = class_from(l);
    lesion.label = l.value("label", std::string());
    spec.lesions.push_back(lesion);
  }
  return spec;
}

int cmd_synth(const std::string& spec_path, const std::string& out_volume, const std::string& out_csv) {
  const auto phantom = generate_phantom(phantom_spec_from_json(read_json(spec_path)));
  save_volume(phantom.volume, out_volume, DType::I16);
  save_annotations(phantom.truth, out_csv);
  return 0;
}

int cmd_synth_study(std::uint64_t seed, const std::string& patient, const std::string& out_dir) {
  StudySpec spec;
  spec.seed = seed;
  spec.patient_id = patient;
  const auto study = generate_study(spec, default_study_lesions());
  write_study(study, patient, out_dir);
  return 0;
}

int cmd_evaluate(const std::string& tracks, const std::string& truth, const std::string& out, bool fixture) {
  std::vector<PatientScore> scores;
  if (fixture) {
    scores = table1_fixture();
  } else {
    if (tracks.empty() || truth.empty()) throw SpecError("evaluate needs --tracks and --truth, or --table1-fixture");
    const auto algorithm = load_tracks(tracks);
    const auto reference = load_tracks(truth);
    if (algorithm.patient_id != reference.patient_id) throw InputMismatch("tracks and truth name different patients");
    PatientScore s = score_patient(algorithm, reference);
    std::vector<LesionAnnotation> annotations;
    for (const auto& t : reference.tracks) {
      for (const auto& o : t.observations) annotations.push_back(o.annotation);
    }
    const auto align = reader_alignment(annotations, reference);
    s.reader1 = align.reader1;
    s.reader2 = align.reader2;
    s.aligned = align.aligned;
    s.misaligned = align.misaligned;
    scores.push_back(s);
  }
  const auto report = aggregate(scores);
  const std::string text = to_json(report).dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    write_text(out, text);
  }
  return 0;
}

int cmd_plot(const std::string& volume, const std::string& overlay, double alpha, const std::string& focus,
             const std::string& markers, const std::string& window, const std::string& out) {
  const Volume base = load_volume(volume);
  std::optional<Volume> over;
  if (!overlay.empty()) over = load_volume(overlay);
  TriaxialRequest req;
  req.volume = &base;
  req.overlay = over ? &*over : nullptr;
  req.alpha = alpha;
  req.focus = parse_point(focus);
  if (!markers.empty()) {
    for (const auto& m : read_json(markers)) {
      req.markers.push_back({point_from_json(m.at("position_mm")), m.value("label", std::string()),
                             class_from(m)});
    }
  }
  if (!window.empty()) {
    std::stringstream ss(window);
    double lo = 0, hi = 0;
    char c = 0;
    if (!(ss >> lo >> c >> hi) || c != ',') throw ParseError("expected --window lo,hi");
    req.window = std::array<double, 2>{lo, hi};
  }
  render_triaxial(req, std::filesystem::path(out));
  return 0;
}

int cmd_plot_tracks(const std::string& tracks, const std::string& volumes, const std::string& out_dir) {
  const auto registry = load_tracks(tracks);
  const auto loader = directory_volume_loader(volumes);
  std::vector<std::string> log;
  const auto files = render_track_sheet(
      registry, [&](const std::string& tp, const std::string& s) { return loader(registry.patient_id, tp, s); },
      out_dir, &log);
  for (const auto& line : log) std::cerr << line << "\n";
  std::cerr << files.size() << " images written\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Registration-assisted lesion matching and correspondence"};
  app.require_subcommand(1);

  std::string csv, patient, timepoint, series, out, volumes, config, audit;
  double target_mm = 40.0, nontarget_mm = 50.0;
  auto* match = app.add_subcommand("match", "Match two readers' lesions within one series");
  match->add_option("--annotations", csv)->required();
  match->add_option("--patient", patient)->required();
  match->add_option("--timepoint", timepoint)->required();
  match->add_option("--series", series)->required();
  match->add_option("--target-threshold", target_mm);
  match->add_option("--nontarget-threshold", nontarget_mm);
  match->add_option("--out", out)->required();

  std::string fixed, moving, out_transform, out_resampled;
  auto* reg = app.add_subcommand("register", "Rigidly register a moving volume to a fixed volume");
  reg->add_option("--fixed", fixed)->required();
  reg->add_option("--moving", moving)->required();
  reg->add_option("--config", config);
  reg->add_option("--out-transform", out_transform)->required();
  reg->add_option("--out-resampled", out_resampled);

  auto* track = app.add_subcommand("track", "Build lesion tracks for one patient");
  track->add_option("--annotations", csv)->required();
  track->add_option("--volumes", volumes);
  track->add_option("--patient", patient)->required();
  track->add_option("--config", config);
  track->add_option("--out", out)->required();
  track->add_option("--audit", audit);

  std::string spec, out_volume, out_annotations;
  auto* synth = app.add_subcommand("synth", "Generate a phantom volume and its lesion table");
  synth->add_option("--spec", spec)->required();
  synth->add_option("--out-volume", out_volume)->required();
  synth->add_option("--out-annotations", out_annotations)->required();

  std::uint64_t seed = 0;
  std::string out_dir;
  patient = "P1";
  auto* study = app.add_subcommand("synth-study", "Generate a longitudinal phantom study");
  study->add_option("--seed", seed);
  study->add_option("--patient", patient);
  study->add_option("--out-dir", out_dir)->required();

  std::string tracks, truth;
  bool fixture = false;
  auto* eval = app.add_subcommand("evaluate", "Score tracks against truth");
  eval->add_option("--tracks", tracks);
  eval->add_option("--truth", truth);
  eval->add_option("--out", out);
  eval->add_flag("--table1-fixture", fixture, "Aggregate the embedded 25-patient table");

  std::string volume, overlay, focus, markers, window;
  double alpha = 0.5;
  auto* plot = app.add_subcommand("plot", "Render a triaxial image");
  plot->add_option("--volume", volume)->required();
  plot->add_option("--overlay", overlay);
  plot->add_option("--alpha", alpha);
  plot->add_option("--focus", focus, "x,y,z in mm")->required();
  plot->add_option("--markers", markers, "JSON list of {position_mm, label, class}");
  plot->add_option("--window", window, "lo,hi");
  plot->add_option("--out", out)->required();

  auto* plot_tracks = app.add_subcommand("plot-tracks", "Render one triaxial image per track observation");
  plot_tracks->add_option("--tracks", tracks)->required();
  plot_tracks->add_option("--volumes", volumes)->required();
  plot_tracks->add_option("--out-dir", out_dir)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*match) return cmd_match(csv, patient, timepoint, series, target_mm, nontarget_mm, out);
    if (*reg) return cmd_register(fixed, moving, config, out_transform, out_resampled);
    if (*track) return cmd_track(csv, volumes, patient, config, out, audit);
    if (*synth) return cmd_synth(spec, out_volume, out_annotations);
    if (*study) return cmd_synth_study(seed, patient, out_dir);
    if (*eval) return cmd_evaluate(tracks, truth, out, fixture);
    if (*plot) return cmd_plot(volume, overlay, alpha, focus, markers, window, out);
    if (*plot_tracks) return cmd_plot_tracks(tracks, volumes, out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
