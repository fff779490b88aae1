#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "shadowbench/detector.hpp"

namespace shadowbench {

/// A detector running as a child process. Per query the harness writes
/// "<png path>\t<ground-truth json path>\n" to its stdin and reads one JSON
/// line {"loss": J, "landmarks": [[x, y] x 68]} from its stdout. Images go out
/// as 16-bit PNGs so small finite-difference steps survive quantization.
/// Not thread-safe. A dead child is restarted on the next query.
class ExecDetector {
 public:
  explicit ExecDetector(std::vector<std::string> argv);
  ~ExecDetector();
  ExecDetector(const ExecDetector&) = delete;
  ExecDetector& operator=(const ExecDetector&) = delete;

  BlackBoxResult query(const Image& image, const Landmarks& truth);
  /// Kills the child; the next query starts a fresh one.
  void reset();

 private:
  void start();

  std::vector<std::string> argv_;
  std::filesystem::path scratch_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string pending_;  // bytes read past the last newline
  std::optional<Landmarks> last_truth_;
};

/// ExecDetector wrapped in an FdOracleAdapter.
std::unique_ptr<DetectorOracle> exec_oracle(std::shared_ptr<ExecDetector> detector, double fd_step);

}  // namespace shadowbench
