// SPDX-License-Identifier: Apache-2.0
#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cctype>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "rtlmark/errors.hpp"
#include "rtlmark/netlist.hpp"

namespace rtlmark {

namespace fs = std::filesystem;

namespace {

constexpr const char* kFlow =
    " -q -p \"read_verilog {input}; synth -top {top}; opt_clean; write_verilog -noattr -noexpr {output}\"";

std::optional<fs::path> find_program(const std::string& prog) {
  if (prog.find('/') != std::string::npos) {
    if (::access(prog.c_str(), X_OK) == 0) return fs::path(prog);
    return std::nullopt;
  }
  const char* path = std::getenv("PATH");
  std::stringstream ss(path ? path : "");
  std::string dir;
  while (std::getline(ss, dir, ':')) {
    if (dir.empty()) continue;
    fs::path p = fs::path(dir) / prog;
    if (::access(p.c_str(), X_OK) == 0) return p;
  }
  return std::nullopt;
}

std::string substitute(std::string t, const std::string& key, const std::string& value) {
  for (size_t p = t.find(key); p != std::string::npos; p = t.find(key, p + value.size()))
    t.replace(p, key.size(), value);
  return t;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct WorkDir {
  fs::path path;
  bool keep;
  WorkDir(bool k) : keep(k) {
    std::string tmpl = (fs::temp_directory_path() / "rtlmark-synth-XXXXXX").string();
    if (!::mkdtemp(tmpl.data())) throw Error("cannot create synthesis work directory");
    path = tmpl;
  }
  ~WorkDir() {
    if (keep) return;
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

}  // namespace

std::string SynthConfig::default_command() {
  if (find_program("yosys")) return std::string("yosys") + kFlow;
  if (find_program("yowasp-yosys")) return std::string("yowasp-yosys") + kFlow;
  return std::string("yosys") + kFlow;
}

std::string SynthConfig::resolved_command() const {
  if (const char* env = std::getenv("RTLMARK_SYNTH"); env && *env) return env;
  return command.empty() ? default_command() : command;
}

bool synthesis_available(const SynthConfig& cfg) {
  std::string cmd = cfg.resolved_command();
  std::string prog = cmd.substr(0, cmd.find_first_of(" \t"));
  return find_program(prog).has_value();
}

vlog::SourceText synthesize(const vlog::SourceText& source, const std::string& top, const SynthConfig& cfg) {
  std::string tmpl = cfg.resolved_command();
  std::string prog = tmpl.substr(0, tmpl.find_first_of(" \t"));
  if (!find_program(prog)) throw ToolMissing("synthesis tool '" + prog + "' not found on PATH");

  WorkDir wd(cfg.keep_workdir);
  fs::path in = wd.path / "input.v";
  fs::path out = wd.path / "netlist.v";
  fs::path log = wd.path / "synth.log";
  {
    std::ofstream f(in, std::ios::binary);
    f << source.content;
    if (!f) throw Error("cannot write " + in.string());
  }
  // The tool runs inside the workdir; WASM builds see only that directory.
  for (char c : top)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$'))
      throw Error("top module name '" + top + "' is not a plain identifier");
  std::string cmd =
      substitute(substitute(substitute(tmpl, "{input}", "input.v"), "{output}", "netlist.v"), "{top}", top);

  pid_t pid = ::fork();
  if (pid < 0) throw Error("fork failed");
  if (pid == 0) {
    ::setpgid(0, 0);
    int fd = ::open(log.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0600);
    if (fd >= 0) {
      ::dup2(fd, 1);
      ::dup2(fd, 2);
      ::close(fd);
    }
    if (::chdir(wd.path.c_str()) != 0) ::_exit(126);
    ::execl("/bin/sh", "sh", "-c", cmd.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::setpgid(pid, pid);
  auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(cfg.timeout_seconds);
  int status = 0;
  for (;;) {
    pid_t r = ::waitpid(pid, &status, WNOHANG);
    if (r == pid) break;
    if (r < 0) throw Error("waitpid failed");
    if (std::chrono::steady_clock::now() > deadline) {
      ::kill(-pid, SIGKILL);
      ::waitpid(pid, &status, 0);
      throw Timeout("synthesis exceeded " + std::to_string(cfg.timeout_seconds) + " s");
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  int code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
  std::string excerpt = read_file(log);
  if (excerpt.size() > 2000) excerpt = excerpt.substr(excerpt.size() - 2000);
  if (code == 127) throw ToolMissing("synthesis command not found: " + excerpt);
  if (code != 0) throw ToolFailed(code, excerpt);
  if (!fs::exists(out)) throw ToolFailed(0, "no netlist written. " + excerpt);
  return vlog::SourceText{read_file(out), top + ".netlist.v"};
}

}  // namespace rtlmark
