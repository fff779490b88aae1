#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "shadowbench/config.hpp"

namespace shadowbench {

/// Process exit statuses.
enum ExitCode : int {
  kExitOk = 0,
  kExitDomain = 1,
  kExitConfig = 2,
  kExitPartial = 3,
  kExitIo = 4,
};

struct SynthOptions {
  std::filesystem::path image;
  std::filesystem::path mask;
  std::filesystem::path depth;  // empty: synthetic face depth
  double alpha = 0.8;
  std::optional<int> size_severity;
  std::optional<int> location_severity;
  std::filesystem::path out;
  std::filesystem::path manifest;  // empty: <out without extension>.jsonl
  std::filesystem::path mask_out;  // optional: placed mask
};

struct EvalOptions {
  std::filesystem::path manifest;
  std::filesystem::path restored_dir;     // empty: evaluate the manifest's own images
  std::filesystem::path predictions_dir;  // empty: no NME
};

struct ReportOptions {
  std::vector<std::pair<std::string, std::filesystem::path>> inputs;  // label, eval.json
  std::string baseline;                                               // empty: first input
};

struct FaceFixtureOptions {
  int count = 8;
  int size = 64;
  bool toy_truth = true;  // false: template landmarks
};

/// Every command writes only below config.output_dir (or the paths named in
/// its options) and prints a one-line summary to `log`.
int cmd_synth(const RunConfig& config, const SynthOptions& opt, std::ostream& log);
int cmd_gen_dataset(const RunConfig& config, std::ostream& log);
int cmd_attack(const RunConfig& config, std::ostream& log);
int cmd_eval(const RunConfig& config, const EvalOptions& opt, std::ostream& log);
int cmd_report(const RunConfig& config, const ReportOptions& opt, std::ostream& log);
int cmd_make_faces(const RunConfig& config, const FaceFixtureOptions& opt, std::ostream& log);
int cmd_starter_shapes(const RunConfig& config, std::ostream& log);

/// Sorted *.png files of a directory.
std::vector<std::filesystem::path> list_pngs(const std::filesystem::path& dir);

/// Seed of one input, a function of (seed, file stem) only.
std::uint64_t stem_seed(std::uint64_t seed, const std::string& stem);

}  // namespace shadowbench
