#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "f2b/backpred.hpp"
#include "f2b/errors.hpp"
#include "f2b/map_io.hpp"

namespace f2b {
namespace {

namespace fs = std::filesystem;

// One predictor process at a time per working directory.
std::mutex& workdir_mutex(const fs::path& dir) {
  static std::mutex registry_guard;
  static std::map<std::string, std::unique_ptr<std::mutex>> registry;
  std::lock_guard lock(registry_guard);
  auto& slot = registry[fs::absolute(dir.empty() ? fs::current_path() : dir).lexically_normal().string()];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

fs::path make_exchange_dir() {
  static std::atomic<unsigned> counter{0};
  const fs::path root = temp_root();
  fs::create_directories(root);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const fs::path dir = root / ("f2b-predict-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::error_code ec;
    if (fs::create_directory(dir, ec)) return dir;
  }
  throw IoError("cannot create predictor exchange directory under " + root.string());
}

std::string substitute_dir(const std::string& command, const fs::path& dir) {
  static const std::string token = "{dir}";
  std::string out;
  std::size_t pos = 0;
  bool found = false;
  while (true) {
    const std::size_t hit = command.find(token, pos);
    if (hit == std::string::npos) break;
    out.append(command, pos, hit - pos);
    out += dir.string();
    pos = hit + token.size();
    found = true;
  }
  out.append(command, pos, std::string::npos);
  if (!found) out += " " + dir.string();
  return out;
}

std::string log_tail(const fs::path& log, std::size_t max_bytes = 2000) {
  std::ifstream in(log, std::ios::binary);
  if (!in) return {};
  std::stringstream buffer;
  buffer << in.rdbuf();
  std::string text = buffer.str();
  if (text.size() > max_bytes) text = text.substr(text.size() - max_bytes);
  return text;
}

// Returns the wait status, or nullopt on timeout (the process group is killed).
std::optional<int> run_shell(const std::string& command, const fs::path& workdir, const fs::path& log,
                             std::chrono::milliseconds timeout) {
  const pid_t pid = ::fork();
  if (pid < 0) throw IoError("fork failed");
  if (pid == 0) {
    ::setpgid(0, 0);
    if (!workdir.empty() && ::chdir(workdir.c_str()) != 0) ::_exit(126);
    const int fd = ::open(log.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (fd >= 0) {
      ::dup2(fd, STDOUT_FILENO);
      ::dup2(fd, STDERR_FILENO);
      ::close(fd);
    }
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::setpgid(pid, pid);
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  int status = 0;
  while (true) {
    const pid_t done = ::waitpid(pid, &status, WNOHANG);
    if (done == pid) return status;
    if (done < 0) throw IoError("waitpid failed");
    if (std::chrono::steady_clock::now() >= deadline) {
      ::kill(-pid, SIGKILL);
      ::kill(pid, SIGKILL);
      ::waitpid(pid, &status, 0);
      return std::nullopt;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
}

}  // namespace

MapSet run_external_predictor(const ExternalCommand& command, const PredictionInput& input) {
  if (command.command_template.empty()) throw ConfigError("external predictor command is empty");
  std::lock_guard lock(workdir_mutex(command.working_directory));

  const fs::path dir = make_exchange_dir();
  write_f2bm(input.front, dir / "front.f2bm");
  write_frame(input.front.frame, dir / "front.frame");
  if (input.reflected) write_f2bm(*input.reflected, dir / "reflected.f2bm");

  const std::string shell = substitute_dir(command.command_template, dir);
  const fs::path log = dir / "predictor.log";
  const auto status = run_shell(shell, command.working_directory, log, command.timeout);

  auto fail = [&](const std::string& what) -> PredictorError {
    std::string diag = "command: " + shell + "\nexchange dir: " + dir.string();
    const std::string tail = log_tail(log);
    if (!tail.empty()) diag += "\noutput:\n" + tail;
    return PredictorError(what, diag);
  };

  if (!status) throw fail("predictor timed out after " + std::to_string(command.timeout.count()) + " ms");
  if (!WIFEXITED(*status)) throw fail("predictor terminated by a signal");
  if (WEXITSTATUS(*status) != 0) throw fail("predictor exited with status " + std::to_string(WEXITSTATUS(*status)));
  if (!fs::exists(dir / "back.f2bm")) throw fail("predictor did not write back.f2bm");

  MapSet back;
  try {
    back = read_f2bm(dir / "back.f2bm", opposite_frame(input.front.frame));
  } catch (const Error& e) {
    throw fail(std::string("invalid back.f2bm: ") + e.what());
  }
  std::error_code ec;
  fs::remove_all(dir, ec);
  return back;
}

}  // namespace f2b
