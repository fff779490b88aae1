#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "shadowbench/commands.hpp"
#include "shadowbench/detector.hpp"
#include "shadowbench/errors.hpp"

using namespace shadowbench;

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string input_dir, silhouette_dir, output_dir, landmarks_dir, depth_dir;
  std::optional<int> workers;
  std::string metric_mode;
  std::string oracle;
  std::string oracle_cmd;

  void attach(CLI::App* app) {
    app->add_option("-c,--config", config, "JSON config file");
    app->add_option("--seed", seed, "Run seed (required here or in the config)");
    app->add_option("--input-dir", input_dir, "Clean input images");
    app->add_option("--silhouette-dir", silhouette_dir, "Occluder silhouettes (default: built-in shapes)");
    app->add_option("-o,--output-dir", output_dir, "Output directory");
    app->add_option("--landmarks-dir", landmarks_dir, "Ground-truth landmark JSON files");
    app->add_option("--depth-dir", depth_dir, "Per-image depth maps (default: synthetic face depth)");
    app->add_option("-j,--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
    app->add_option("--metric-mode", metric_mode, "rms or mae_compat");
    app->add_option("--oracle", oracle, "toy or exec");
    app->add_option("--oracle-cmd", oracle_cmd, "External detector command line (split on whitespace)");
  }

  nlohmann::json overrides() const {
    nlohmann::json j = nlohmann::json::object();
    if (seed) j["seed"] = *seed;
    auto set = [&](const char* key, const std::string& v) {
      if (!v.empty()) j[key] = v;
    };
    set("input_dir", input_dir);
    set("silhouette_dir", silhouette_dir);
    set("output_dir", output_dir);
    set("landmarks_dir", landmarks_dir);
    set("depth_dir", depth_dir);
    set("metric_mode", metric_mode);
    if (workers) j["worker_count"] = *workers;
    if (!oracle.empty()) j["oracle"]["kind"] = oracle;
    if (!oracle_cmd.empty()) {
      std::istringstream in(oracle_cmd);
      std::vector<std::string> argv;
      for (std::string a; in >> a;) argv.push_back(a);
      j["oracle"]["command"] = argv;
    }
    return j;
  }

  RunConfig load() const { return load_config(config, overrides()); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shadow robustness benchmark toolkit for face landmark detection"};
  app.require_subcommand(1);

  CommonFlags common;
  SynthOptions synth;
  std::string synth_image, synth_mask, synth_depth, synth_out, synth_manifest, synth_mask_out;
  std::optional<int> synth_size, synth_location;
  auto* c_synth = app.add_subcommand("synth", "Render one shadowed image");
  common.attach(c_synth);
  c_synth->add_option("--image", synth_image, "Clean image")->required();
  c_synth->add_option("--mask", synth_mask, "Occluder mask")->required();
  c_synth->add_option("--depth", synth_depth, "Depth map");
  c_synth->add_option("--alpha", synth.alpha, "Ambient attenuation in [0, 1)")->required();
  c_synth->add_option("--size", synth_size, "Rescale the mask to this size severity (1-3)");
  c_synth->add_option("--location", synth_location, "Move the mask centroid to this location severity (1-3)");
  c_synth->add_option("--out", synth_out, "Output PNG")->required();
  c_synth->add_option("--manifest", synth_manifest, "Manifest path (default: next to --out)");
  c_synth->add_option("--mask-out", synth_mask_out, "Also write the placed mask");

  auto* c_gen = app.add_subcommand("gen-dataset", "Render the 81-cell factor grid for every input image");
  common.attach(c_gen);

  auto* c_attack = app.add_subcommand("attack", "Adversarial shadow attack on every input image");
  common.attach(c_attack);

  EvalOptions eval;
  std::string eval_manifest, eval_restored, eval_predictions;
  auto* c_eval = app.add_subcommand("eval", "RMSE and NME for a manifest");
  common.attach(c_eval);
  c_eval->add_option("--manifest", eval_manifest, "manifest.jsonl")->required();
  c_eval->add_option("--restored-dir", eval_restored, "Restored images (default: the manifest's own images)");
  c_eval->add_option("--predictions-dir", eval_predictions, "Predicted landmark JSON files");

  ReportOptions report;
  std::vector<std::string> report_inputs;
  auto* c_report = app.add_subcommand("report", "Compare eval.json files against a baseline");
  common.attach(c_report);
  c_report->add_option("inputs", report_inputs, "label=path/to/eval.json")->required();
  c_report->add_option("--baseline", report.baseline, "Baseline label (default: first input)");

  FaceFixtureOptions faces;
  std::string truth = "toy";
  auto* c_faces = app.add_subcommand("make-faces", "Write synthetic faces and landmark files");
  common.attach(c_faces);
  c_faces->add_option("--count", faces.count, "Number of faces");
  c_faces->add_option("--size", faces.size, "Side length in pixels");
  c_faces->add_option("--truth", truth, "toy (toy detector prediction) or template")
      ->check(CLI::IsMember({"toy", "template"}));

  auto* c_shapes = app.add_subcommand("starter-shapes", "Write the built-in silhouette set as PNGs");
  common.attach(c_shapes);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    const RunConfig config = common.load();
    if (*c_synth) {
      synth.image = synth_image;
      synth.mask = synth_mask;
      synth.depth = synth_depth;
      synth.size_severity = synth_size;
      synth.location_severity = synth_location;
      synth.out = synth_out;
      synth.manifest = synth_manifest;
      synth.mask_out = synth_mask_out;
      return cmd_synth(config, synth, std::cout);
    }
    if (*c_gen) return cmd_gen_dataset(config, std::cout);
    if (*c_attack) return cmd_attack(config, std::cout);
    if (*c_eval) {
      eval.manifest = eval_manifest;
      eval.restored_dir = eval_restored;
      eval.predictions_dir = eval_predictions;
      return cmd_eval(config, eval, std::cout);
    }
    if (*c_report) {
      for (const auto& s : report_inputs) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("report input must be label=path, got " + s);
        report.inputs.emplace_back(s.substr(0, eq), s.substr(eq + 1));
      }
      return cmd_report(config, report, std::cout);
    }
    if (*c_faces) {
      faces.toy_truth = truth == "toy";
      return cmd_make_faces(config, faces, std::cout);
    }
    if (*c_shapes) return cmd_starter_shapes(config, std::cout);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const OracleError& e) {
    std::cerr << "oracle error: " << e.what() << "\n";
    return kExitPartial;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitConfig;
}
