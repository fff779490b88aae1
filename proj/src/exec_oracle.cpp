#include "shadowbench/exec_oracle.hpp"

#include <cerrno>
#include <cmath>
#include <csignal>
#include <cstring>

#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "shadowbench/errors.hpp"
#include "shadowbench/manifest.hpp"
#include "shadowbench/png_io.hpp"

namespace shadowbench {
namespace {

std::filesystem::path make_scratch_dir() {
  auto base = std::filesystem::temp_directory_path();
  for (int attempt = 0;; ++attempt) {
    auto dir = base / ("shadowbench-oracle-" + std::to_string(::getpid()) + "-" + std::to_string(attempt));
    std::error_code ec;
    if (std::filesystem::create_directory(dir, ec)) return dir;
    if (attempt > 1000) throw IoError(IoErrorKind::write_failed, "cannot create oracle scratch directory");
  }
}

void write_all(int fd, const std::string& s) {
  std::size_t done = 0;
  while (done < s.size()) {
    const ssize_t n = ::write(fd, s.data() + done, s.size() - done);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw OracleError("external detector: write to child failed");
    done += static_cast<std::size_t>(n);
  }
}

}  // namespace

ExecDetector::ExecDetector(std::vector<std::string> argv) : argv_(std::move(argv)) {
  if (argv_.empty()) throw ConfigError("external detector command is empty");
  // A child that dies mid-request must surface as an error, not kill us.
  std::signal(SIGPIPE, SIG_IGN);
  scratch_ = make_scratch_dir();
}

ExecDetector::~ExecDetector() {
  reset();
  std::error_code ec;
  std::filesystem::remove_all(scratch_, ec);
}

void ExecDetector::start() {
  int in_pipe[2], out_pipe[2];
  if (::pipe(in_pipe) != 0) throw OracleError("external detector: pipe failed");
  if (::pipe(out_pipe) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw OracleError("external detector: pipe failed");
  }
  std::vector<char*> args;
  for (auto& a : argv_) args.push_back(a.data());
  args.push_back(nullptr);
  const pid_t pid = ::fork();
  if (pid < 0) throw OracleError("external detector: fork failed");
  if (pid == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    ::close(out_pipe[1]);
    ::execvp(args[0], args.data());
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  ::fcntl(in_pipe[1], F_SETFD, FD_CLOEXEC);
  ::fcntl(out_pipe[0], F_SETFD, FD_CLOEXEC);
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  pending_.clear();
}

void ExecDetector::reset() {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  to_child_ = from_child_ = -1;
  if (pid_ > 0) {
    int status = 0;
    if (::waitpid(pid_, &status, WNOHANG) == 0) {
      ::kill(pid_, SIGTERM);
      ::waitpid(pid_, &status, 0);
    }
  }
  pid_ = -1;
  pending_.clear();
}

BlackBoxResult ExecDetector::query(const Image& image, const Landmarks& truth) {
  if (pid_ < 0) start();
  const auto png = scratch_ / "query.png";
  const auto gt = scratch_ / "truth.json";
  save_image16(image, png);
  if (!last_truth_ || *last_truth_ != truth) {
    write_landmarks(gt, truth);
    last_truth_ = truth;
  }

  std::string line;
  try {
    write_all(to_child_, png.string() + "\t" + gt.string() + "\n");
    for (;;) {
      const auto nl = pending_.find('\n');
      if (nl != std::string::npos) {
        line = pending_.substr(0, nl);
        pending_.erase(0, nl + 1);
        break;
      }
      char buf[4096];
      const ssize_t n = ::read(from_child_, buf, sizeof buf);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) throw OracleError("external detector exited or closed its output");
      pending_.append(buf, static_cast<std::size_t>(n));
    }
  } catch (const OracleError&) {
    reset();
    throw;
  }

  try {
    const auto j = nlohmann::json::parse(line);
    BlackBoxResult r;
    r.loss = j.at("loss").get<double>();
    r.landmarks = landmarks_from_json(j.at("landmarks"));
    if (!std::isfinite(r.loss) || r.loss < 0.0) throw OracleError("external detector returned an invalid loss");
    return r;
  } catch (const nlohmann::json::exception& e) {
    reset();
    throw OracleError(std::string("external detector reply is not valid JSON: ") + e.what());
  } catch (const IoError& e) {
    reset();
    throw OracleError(std::string("external detector reply: ") + e.what());
  }
}

std::unique_ptr<DetectorOracle> exec_oracle(std::shared_ptr<ExecDetector> detector, double fd_step) {
  FdOptions opt;
  opt.step = fd_step;
  return std::make_unique<FdOracleAdapter>(
      [detector](const Image& img, const Landmarks& truth) { return detector->query(img, truth); }, opt, false);
}

}  // namespace shadowbench
