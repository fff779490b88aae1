#include "shadowbench/commands.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "shadowbench/errors.hpp"
#include "shadowbench/exec_oracle.hpp"
#include "shadowbench/manifest.hpp"
#include "shadowbench/png_io.hpp"
#include "shadowbench/silhouettes.hpp"
#include "shadowbench/synthetic_faces.hpp"

namespace shadowbench {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void use_workers(const RunConfig& c) { omp_set_num_threads(c.worker_count); }

fs::path prepare_output_dir(const RunConfig& c) {
  if (c.output_dir.empty()) throw ConfigError("output_dir is not set");
  std::error_code ec;
  fs::create_directories(c.output_dir, ec);
  if (!fs::is_directory(c.output_dir))
    throw IoError(IoErrorKind::write_failed, "cannot create output_dir " + c.output_dir.string());
  return c.output_dir;
}

fs::path make_subdir(const fs::path& root, const char* name) {
  const fs::path p = root / name;
  std::error_code ec;
  fs::create_directories(p, ec);
  if (!fs::is_directory(p)) throw IoError(IoErrorKind::write_failed, "cannot create " + p.string());
  return p;
}

std::vector<SilhouetteEntry> load_library(const RunConfig& c) {
  std::vector<NamedMask> raw;
  if (c.silhouette_dir.empty()) {
    raw = starter_silhouettes();
  } else {
    require_dir(c.silhouette_dir, "silhouette_dir");
    raw = load_silhouette_dir(c.silhouette_dir);
  }
  if (raw.size() < 3) throw DomainError("the silhouette library needs at least 3 masks to fill the shape bins");
  return bin_silhouettes(std::move(raw));
}

ScalarField depth_for(const RunConfig& c, const std::string& stem, int h, int w) {
  if (c.depth_dir.empty()) return synthetic_face_depth(h, w);
  ScalarField d = load_field(c.depth_dir / (stem + ".png"), FieldRole::depth);
  if (d.height() != h || d.width() != w) throw ShapeError("depth map " + stem + " does not match its image");
  return d;
}

int severity_of_alpha(double alpha) {
  for (int s = 1; s <= 3; ++s)
    if (intensity_range(s).contains(alpha)) return s;
  return 0;
}

double complexity_or_zero(const Raster<1>& mask) {
  try {
    return shape_complexity(mask);
  } catch (const DomainError&) {
    return 0.0;
  }
}

double mask_area_fraction(const ScalarField& m) {
  return static_cast<double>(m.foreground_count()) / static_cast<double>(m.height() * m.width());
}

Point2 centroid_or_zero(const ScalarField& m) { return foreground_centroid(m).value_or(Point2{}); }

}  // namespace

std::vector<fs::path> list_pngs(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    auto ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (ext == ".png") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::uint64_t stem_seed(std::uint64_t seed, const std::string& stem) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : stem) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return derive_seed(seed, h);
}

// ---------------------------------------------------------------- synth

int cmd_synth(const RunConfig& config, const SynthOptions& opt, std::ostream& log) {
  const std::uint64_t seed = config.require_seed();
  if (!(opt.alpha >= 0.0 && opt.alpha < 1.0)) throw DomainError("alpha must lie in [0, 1)");
  if (opt.out.empty()) throw ConfigError("synth needs an output path");
  for (auto s : {opt.size_severity, opt.location_severity})
    if (s) check_severity(*s);
  use_workers(config);

  const Image clean = load_image(opt.image);
  const int h = clean.height(), w = clean.width();
  const ScalarField source_mask = load_field(opt.mask, FieldRole::mask);
  const ScalarField depth =
      opt.depth.empty() ? synthetic_face_depth(h, w) : load_field(opt.depth, FieldRole::depth);

  Rng rng(seed);
  ScalarField mask;
  double clip = 0.0;
  double area = 0.0;
  Point2 centroid;
  if (opt.size_severity) {
    const ScaledMask scaled = rescale_mask_to_area(source_mask, area_range(*opt.size_severity), h, w, rng);
    const ScaledMask placed = place_mask(scaled, opt.location_severity.value_or(2), h, w);
    auto canvas = placed.to_canvas(h, w);
    mask = std::move(canvas.mask);
    clip = canvas.clip_fraction;
    area = placed.area_fraction(h, w);
    centroid = placed.centroid();
  } else {
    if (source_mask.height() != h || source_mask.width() != w)
      throw ShapeError("mask extent differs from the image; pass --size to rescale it");
    mask = opt.location_severity ? place_mask(source_mask, *opt.location_severity, &clip) : source_mask;
    area = mask_area_fraction(mask);
    centroid = centroid_or_zero(mask);
  }

  ShadowParams params{opt.alpha, config.synth.beta, mask, depth, config.synth.matte};
  for (const fs::path& p : {opt.out, opt.mask_out, opt.manifest})
    if (!p.empty() && p.has_parent_path()) fs::create_directories(p.parent_path());
  save_image(compose_shadow(clean, params), opt.out);
  if (!opt.mask_out.empty()) save_field(mask, opt.mask_out);

  DatasetManifestRecord r;
  r.source_image = opt.image.filename().string();
  r.output_image = opt.out.filename().string();
  r.factor_spec = {severity_of_alpha(opt.alpha), opt.size_severity.value_or(0), 0,
                   opt.location_severity.value_or(0), seed};
  r.alpha = opt.alpha;
  r.mask_id = opt.mask.stem().string();
  r.area_fraction = area;
  r.centroid = centroid;
  r.complexity = complexity_or_zero(source_mask);
  r.clip_fraction = clip;
  r.mask_image = opt.mask_out.empty() ? std::string() : opt.mask_out.filename().string();
  fs::path manifest = opt.manifest;
  if (manifest.empty()) manifest = fs::path(opt.out).replace_extension(".jsonl");
  write_manifest(manifest, {r});
  log << "synth: wrote " << opt.out.string() << " (alpha " << fmt(opt.alpha, 3) << ", area " << fmt(area, 3)
      << ")\n";
  return kExitOk;
}

// ---------------------------------------------------------------- gen-dataset

int cmd_gen_dataset(const RunConfig& config, std::ostream& log) {
  const std::uint64_t seed = config.require_seed();
  require_dir(config.input_dir, "input_dir");
  const auto library = load_library(config);
  const auto inputs = list_pngs(config.input_dir);
  if (inputs.empty()) throw DomainError("input_dir contains no PNG images");
  const fs::path root = prepare_output_dir(config);
  const fs::path images = make_subdir(root, "images");
  const fs::path masks = make_subdir(root, "masks");
  use_workers(config);

  std::vector<DatasetManifestRecord> records;
  std::vector<std::string> failures;
  for (const auto& path : inputs) {
    const std::string stem = path.stem().string();
    try {
      const Image clean = load_image(path);
      const ScalarField depth = depth_for(config, stem, clean.height(), clean.width());
      auto outcomes =
          generate_grid_cells(clean, depth, library, stem_seed(seed, stem), config.synth, stem);
      for (int idx = 0; idx < kGridCells; ++idx) {
        auto& o = outcomes[idx];
        if (!o.cell) {
          failures.push_back(stem + " cell " + std::to_string(idx) + ": " + o.error);
          continue;
        }
        auto& rec = o.cell->record;
        const std::string name = rec.output_image;
        rec.source_image = path.filename().string();
        rec.output_image = "images/" + name;
        rec.mask_image = "masks/" + name;
        save_image(o.cell->image, images / name);
        save_field(o.cell->mask, masks / name);
        records.push_back(std::move(rec));
      }
    } catch (const Error& e) {
      failures.push_back(stem + ": " + e.what());
    }
  }
  write_manifest(root / "manifest.jsonl", records);
  for (const auto& f : failures) log << "gen-dataset: failed " << f << "\n";
  log << "gen-dataset: " << inputs.size() << " inputs, " << records.size() << " outputs, " << failures.size()
      << " failures, manifest " << file_digest(root / "manifest.jsonl") << "\n";
  return failures.empty() ? kExitOk : kExitPartial;
}

// ---------------------------------------------------------------- attack

namespace {

struct AttackJob {
  fs::path image;
  std::string stem;
  std::uint64_t seed = 0;
};

struct AttackOutcome {
  bool ok = false;
  std::string error;
  DatasetManifestRecord record;
  std::vector<TraceEntry> trace;
  Image adv;
  ScalarField mask;
  Landmarks prediction{};
  double initial_nme = 0.0;
  double final_nme = 0.0;
};

struct InitialMask {
  ScalarField mask;
  std::string id;
  double complexity = 0.0;
  double clip = 0.0;
};

InitialMask initial_mask(const std::vector<SilhouetteEntry>& library, const AttackInit& init, int h, int w,
                         Rng& rng) {
  std::vector<const SilhouetteEntry*> bin;
  for (const auto& e : library)
    if (e.severity_bin == init.shape_severity) bin.push_back(&e);
  for (int attempt = 0; attempt < 16; ++attempt) {
    const SilhouetteEntry& s = *bin[rng.index(bin.size())];
    try {
      const ScaledMask scaled = rescale_mask_to_area(s.mask, area_range(init.size_severity), h, w, rng);
      auto canvas = place_mask(scaled, init.location_severity, h, w).to_canvas(h, w);
      return {std::move(canvas.mask), s.id, s.complexity, canvas.clip_fraction};
    } catch (const DomainError&) {
    }
  }
  throw DomainError("no silhouette reaches the initial occluder size");
}

AttackOutcome run_attack_job(const RunConfig& config, const AttackJob& job,
                             const std::vector<SilhouetteEntry>& library, const DetectorOracle* shared_oracle) {
  AttackOutcome out;
  const Image clean = load_image(job.image);
  const int h = clean.height(), w = clean.width();
  const Landmarks truth = read_landmarks(config.landmarks_dir / (job.stem + ".json"));
  const ScalarField depth = depth_for(config, job.stem, h, w);
  Rng rng(job.seed);
  const InitialMask init = initial_mask(library, config.attack_init, h, w, rng);

  std::unique_ptr<DetectorOracle> own;
  const DetectorOracle* oracle = shared_oracle;
  if (!oracle) {
    own = toy_detector(config.oracle.toy_weights_seed, h, w);
    oracle = own.get();
  }
  const AttackResult res = attack(clean, depth, truth, *oracle, config.attack, init.mask, config.synth);

  const ScalarField final_mask = affine_warp(res.state.mask, res.state.theta);
  out.adv = res.image;
  out.mask = final_mask;
  out.trace = res.trace;
  out.prediction = res.landmarks;
  out.initial_nme = nme(res.initial_landmarks, truth);
  out.final_nme = nme(res.landmarks, truth);

  auto& r = out.record;
  r.source_image = job.image.filename().string();
  r.output_image = "adv/" + job.stem + ".png";
  r.factor_spec = {severity_of_alpha(config.attack.alpha0), config.attack_init.size_severity,
                   config.attack_init.shape_severity, config.attack_init.location_severity, job.seed};
  r.alpha = res.state.alpha;
  r.mask_id = init.id;
  r.area_fraction = mask_area_fraction(final_mask);
  r.centroid = centroid_or_zero(final_mask);
  r.complexity = init.complexity;
  r.clip_fraction = init.clip;
  r.mask_image = "masks/" + job.stem + ".png";
  DatasetManifestRecord::AttackInfo info;
  info.initial_loss = res.initial_loss;
  info.final_loss = res.loss;
  info.theta = res.state.theta.v;
  info.mask_linf = res.state.mask_linf();
  info.best_iteration = res.best_iteration;
  r.attack = info;
  out.ok = true;
  return out;
}

}  // namespace

int cmd_attack(const RunConfig& config, std::ostream& log) {
  const std::uint64_t seed = config.require_seed();
  require_dir(config.input_dir, "input_dir");
  require_dir(config.landmarks_dir, "landmarks_dir");
  const auto library = load_library(config);
  const auto inputs = list_pngs(config.input_dir);
  if (inputs.empty()) throw DomainError("input_dir contains no PNG images");
  const fs::path root = prepare_output_dir(config);
  const fs::path adv_dir = make_subdir(root, "adv");
  const fs::path mask_dir = make_subdir(root, "masks");
  const fs::path trace_dir = make_subdir(root, "traces");
  const fs::path pred_dir = make_subdir(root, "predictions");
  use_workers(config);

  std::vector<AttackJob> jobs;
  for (const auto& p : inputs) jobs.push_back({p, p.stem().string(), stem_seed(seed, p.stem().string())});
  std::vector<AttackOutcome> outcomes(jobs.size());

  if (config.oracle.kind == OracleKind::toy) {
    const int n = static_cast<int>(jobs.size());
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i) {
      try {
        outcomes[i] = run_attack_job(config, jobs[i], library, nullptr);
      } catch (const std::exception& e) {
        outcomes[i].error = e.what();
      }
    }
  } else {
    if (config.oracle.command.empty()) throw ConfigError("oracle.command is required for the exec oracle");
    auto detector = std::make_shared<ExecDetector>(config.oracle.command);
    const auto oracle = exec_oracle(detector, config.oracle.fd_step);
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      try {
        outcomes[i] = run_attack_job(config, jobs[i], library, oracle.get());
      } catch (const std::exception& e) {
        outcomes[i].error = e.what();
        detector->reset();
      }
    }
  }

  std::vector<DatasetManifestRecord> records;
  double loss0 = 0.0, loss1 = 0.0, nme0 = 0.0, nme1 = 0.0;
  std::size_t failed = 0;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    auto& o = outcomes[i];
    if (!o.ok) {
      ++failed;
      log << "attack: failed " << jobs[i].stem << ": " << o.error << "\n";
      continue;
    }
    save_image(o.adv, adv_dir / (jobs[i].stem + ".png"));
    save_field(o.mask, mask_dir / (jobs[i].stem + ".png"));
    write_trace(trace_dir / (jobs[i].stem + ".jsonl"), o.trace);
    write_landmarks(pred_dir / (jobs[i].stem + ".json"), o.prediction);
    loss0 += o.record.attack->initial_loss;
    loss1 += o.record.attack->final_loss;
    nme0 += o.initial_nme;
    nme1 += o.final_nme;
    records.push_back(std::move(o.record));
  }
  write_manifest(root / "manifest.jsonl", records);
  const double k = records.empty() ? 1.0 : static_cast<double>(records.size());
  log << "attack: " << records.size() << " attacked, " << failed << " failed, mean loss " << fmt(loss0 / k) << " -> "
      << fmt(loss1 / k) << ", mean NME " << fmt(nme0 / k) << " -> " << fmt(nme1 / k) << "\n";
  return failed == 0 ? kExitOk : kExitPartial;
}

// ---------------------------------------------------------------- eval

namespace {

ordered_json opt_json(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(); }

std::string opt_text(const std::optional<double>& v, int digits = 4) { return v ? fmt(*v, digits) : "-"; }

std::string pad(const std::string& s, std::size_t n) { return s.size() >= n ? s : s + std::string(n - s.size(), ' '); }
std::string lpad(const std::string& s, std::size_t n) {
  return s.size() >= n ? s : std::string(n - s.size(), ' ') + s;
}

}  // namespace

int cmd_eval(const RunConfig& config, const EvalOptions& opt, std::ostream& log) {
  require_dir(config.input_dir, "input_dir");
  if (!opt.restored_dir.empty()) require_dir(opt.restored_dir, "restored_dir");
  if (!opt.predictions_dir.empty()) {
    require_dir(opt.predictions_dir, "predictions_dir");
    require_dir(config.landmarks_dir, "landmarks_dir");
  }
  const auto manifest = read_manifest(opt.manifest);
  const fs::path dataset_root = opt.manifest.parent_path();
  const fs::path root = prepare_output_dir(config);
  use_workers(config);

  const int n = static_cast<int>(manifest.size());
  std::vector<ItemMetrics> metrics(n);
  std::vector<std::vector<std::string>> missing(n);
  std::vector<std::string> errors(n);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    const auto& r = manifest[i];
    auto need = [&](const fs::path& p) {
      if (fs::exists(p)) return true;
      missing[i].push_back(p.string());
      return false;
    };
    try {
      const fs::path clean_path = config.input_dir / r.source_image;
      const fs::path restored_path = opt.restored_dir.empty() ? dataset_root / r.output_image
                                                              : opt.restored_dir / fs::path(r.output_image).filename();
      const bool have_mask = !r.mask_image.empty();
      const fs::path mask_path = dataset_root / r.mask_image;
      if (need(clean_path) && need(restored_path) && (!have_mask || need(mask_path))) {
        const Image clean = load_image(clean_path);
        const Image restored = load_image(restored_path);
        if (have_mask) {
          const RegionReport rr = region_report(clean, restored, load_field(mask_path, FieldRole::mask),
                                                config.metric_mode);
          metrics[i].rmse_shadow = rr.rmse_shadow;
          metrics[i].rmse_non_shadow = rr.rmse_non_shadow;
          metrics[i].rmse_all = rr.rmse_all;
        } else {
          metrics[i].rmse_all = rmse_lab(clean, restored, nullptr, config.metric_mode);
        }
      }
      if (!opt.predictions_dir.empty()) {
        const fs::path pred = opt.predictions_dir / (fs::path(r.output_image).stem().string() + ".json");
        const fs::path gt = config.landmarks_dir / (fs::path(r.source_image).stem().string() + ".json");
        if (need(pred) && need(gt)) metrics[i].nme = nme(read_landmarks(pred), read_landmarks(gt));
      }
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }

  const SummaryTable table = aggregate_report(manifest, metrics);
  ordered_json j;
  j["metric_mode"] = metric_mode_name(config.metric_mode);
  j["records"] = ordered_json::array();
  for (int i = 0; i < n; ++i) {
    ordered_json rec;
    rec["output_image"] = manifest[i].output_image;
    rec["source_image"] = manifest[i].source_image;
    rec["rmse_shadow"] = opt_json(metrics[i].rmse_shadow);
    rec["rmse_non_shadow"] = opt_json(metrics[i].rmse_non_shadow);
    rec["rmse_all"] = opt_json(metrics[i].rmse_all);
    rec["nme"] = opt_json(metrics[i].nme);
    j["records"].push_back(rec);
  }
  ordered_json summary = ordered_json::object();
  std::ostringstream txt;
  txt << pad("group", 16) << lpad("records", 8) << lpad("rmse_shadow", 13) << lpad("rmse_non_shadow", 17)
      << lpad("rmse_all", 10) << lpad("nme", 10) << "\n";
  for (const auto& key : summary_group_keys()) {
    const auto it = table.groups.find(key);
    if (it == table.groups.end()) continue;
    const GroupStats& g = it->second;
    summary[key] = {{"records", g.records},
                    {"rmse_shadow", opt_json(g.rmse_shadow)},
                    {"rmse_non_shadow", opt_json(g.rmse_non_shadow)},
                    {"rmse_all", opt_json(g.rmse_all)},
                    {"nme", opt_json(g.nme)},
                    {"missing", g.missing}};
    txt << pad(key, 16) << lpad(std::to_string(g.records), 8) << lpad(opt_text(g.rmse_shadow), 13)
        << lpad(opt_text(g.rmse_non_shadow), 17) << lpad(opt_text(g.rmse_all), 10) << lpad(opt_text(g.nme), 10)
        << "\n";
  }
  j["summary"] = summary;
  ordered_json miss = ordered_json::array();
  std::size_t problems = 0;
  for (int i = 0; i < n; ++i) {
    for (const auto& m : missing[i]) {
      miss.push_back(m);
      log << "eval: missing " << m << "\n";
      ++problems;
    }
    if (!errors[i].empty()) {
      miss.push_back(manifest[i].output_image + ": " + errors[i]);
      log << "eval: error " << manifest[i].output_image << ": " << errors[i] << "\n";
      ++problems;
    }
  }
  j["missing"] = miss;
  write_text(root / "eval.json", j.dump(2) + "\n");
  write_text(root / "eval.txt", txt.str());
  log << "eval: " << n << " records, " << problems << " problems, overall rmse_all "
      << (table.groups.count("overall") ? opt_text(table.groups.at("overall").rmse_all) : "-") << ", nme "
      << (table.groups.count("overall") ? opt_text(table.groups.at("overall").nme) : "-") << "\n";
  return problems == 0 ? kExitOk : kExitPartial;
}

// ---------------------------------------------------------------- report

namespace {

struct EvalSummary {
  std::string label;
  std::map<std::string, std::map<std::string, std::optional<double>>> groups;  // group -> metric -> value
  std::set<std::string> records;
};

constexpr const char* kReportMetrics[] = {"rmse_shadow", "rmse_non_shadow", "rmse_all", "nme"};

EvalSummary read_eval(const std::string& label, const fs::path& path) {
  EvalSummary s;
  s.label = label;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(path));
    for (const auto& [group, stats] : j.at("summary").items())
      for (const char* m : kReportMetrics) {
        const auto& v = stats.at(m);
        s.groups[group][m] = v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
      }
    for (const auto& r : j.at("records")) s.records.insert(r.at("output_image").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw IoError(IoErrorKind::corrupt_stream, path.string() + ": not an eval.json: " + e.what());
  }
  return s;
}

}  // namespace

int cmd_report(const RunConfig& config, const ReportOptions& opt, std::ostream& log) {
  if (opt.inputs.empty()) throw ConfigError("report needs at least one eval input");
  std::vector<EvalSummary> evals;
  std::set<std::string> labels;
  for (const auto& [label, path] : opt.inputs) {
    if (!labels.insert(label).second) throw ConfigError("duplicate report label " + label);
    evals.push_back(read_eval(label, path));
  }
  const std::string base_label = opt.baseline.empty() ? opt.inputs.front().first : opt.baseline;
  const auto base_it =
      std::find_if(evals.begin(), evals.end(), [&](const EvalSummary& e) { return e.label == base_label; });
  if (base_it == evals.end()) throw ConfigError("baseline label " + base_label + " is not among the inputs");
  std::vector<const EvalSummary*> columns{&*base_it};
  std::vector<const EvalSummary*> others;
  for (const auto& e : evals)
    if (&e != &*base_it) others.push_back(&e);
  std::sort(others.begin(), others.end(), [](auto* a, auto* b) { return a->label < b->label; });
  columns.insert(columns.end(), others.begin(), others.end());
  const EvalSummary& base = *columns.front();

  std::vector<std::string> flags;
  for (auto* c : others)
    if (c->records != base.records) flags.push_back("record set of " + c->label + " differs from baseline " + base.label);

  std::vector<std::string> group_keys;
  for (const auto& key : summary_group_keys()) {
    bool any = false;
    for (auto* c : columns) any = any || c->groups.count(key);
    if (any) group_keys.push_back(key);
  }

  ordered_json j;
  j["baseline"] = base.label;
  j["columns"] = ordered_json::array();
  for (auto* c : columns) j["columns"].push_back(c->label);
  j["rows"] = ordered_json::array();
  std::ostringstream txt;
  txt << pad("group", 16) << pad("metric", 17);
  for (auto* c : columns) {
    txt << lpad(c->label, 12);
    if (c != &base) txt << lpad("gain%", 9);
  }
  txt << "\n";
  auto value = [](const EvalSummary& e, const std::string& g, const char* m) -> std::optional<double> {
    const auto it = e.groups.find(g);
    if (it == e.groups.end()) return std::nullopt;
    const auto jt = it->second.find(m);
    return jt == it->second.end() ? std::nullopt : jt->second;
  };
  for (const auto& g : group_keys)
    for (const char* m : kReportMetrics) {
      ordered_json row;
      row["group"] = g;
      row["metric"] = m;
      row["values"] = ordered_json::array();
      row["gains"] = ordered_json::array();
      const auto b = value(base, g, m);
      txt << pad(g, 16) << pad(m, 17);
      for (auto* c : columns) {
        const auto v = value(*c, g, m);
        row["values"].push_back(opt_json(v));
        txt << lpad(opt_text(v), 12);
        if (c != &base) {
          std::optional<double> gain;
          if (v && b && *b != 0.0) gain = relative_gain(*b, *v);
          row["gains"].push_back(opt_json(gain));
          txt << lpad(opt_text(gain, 1), 9);
        }
      }
      txt << "\n";
      j["rows"].push_back(row);
    }
  j["flags"] = flags;
  for (const auto& f : flags) txt << "FLAG: " << f << "\n";

  const fs::path root = prepare_output_dir(config);
  write_text(root / "report.json", j.dump(2) + "\n");
  write_text(root / "report.txt", txt.str());
  for (const auto& f : flags) log << "report: " << f << "\n";
  log << "report: " << columns.size() << " columns, baseline " << base.label << ", " << flags.size() << " flags\n";
  return flags.empty() ? kExitOk : kExitPartial;
}

// ---------------------------------------------------------------- fixtures

int cmd_make_faces(const RunConfig& config, const FaceFixtureOptions& opt, std::ostream& log) {
  const std::uint64_t seed = config.require_seed();
  if (opt.count < 1) throw ConfigError("count must be >= 1");
  if (opt.size < 16) throw ConfigError("face size must be >= 16");
  const fs::path root = prepare_output_dir(config);
  const fs::path faces = make_subdir(root, "faces");
  const fs::path marks = make_subdir(root, "landmarks");
  const ToyDetector toy(config.oracle.toy_weights_seed, opt.size, opt.size);
  for (int i = 0; i < opt.count; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "face_%03d", i);
    const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(i));
    const Image img = synthetic_face(s, opt.size, opt.size);
    save_image(img, faces / (std::string(name) + ".png"));
    // Truth is taken from the image as written, so it survives the 8-bit round trip.
    const Landmarks truth = opt.toy_truth ? toy.predict(load_image(faces / (std::string(name) + ".png")))
                                          : synthetic_face_landmarks(s, opt.size, opt.size);
    write_landmarks(marks / (std::string(name) + ".json"), truth);
  }
  log << "make-faces: " << opt.count << " faces of " << opt.size << "x" << opt.size << " in " << root.string()
      << "\n";
  return kExitOk;
}

int cmd_starter_shapes(const RunConfig& config, std::ostream& log) {
  const fs::path root = prepare_output_dir(config);
  const auto lib = starter_silhouettes();
  write_silhouette_dir(lib, root);
  log << "starter-shapes: " << lib.size() << " silhouettes in " << root.string() << "\n";
  return kExitOk;
}

}  // namespace shadowbench
