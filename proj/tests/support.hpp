#pragma once

// Shared helpers for the unit-test suites and the acceptance runner. This
// header must not depend on doctest so the acceptance binary can use it too.

#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#ifndef GEOMPROBE_DATA_DIR
#error "GEOMPROBE_DATA_DIR must be defined by the build"
#endif
#ifndef GEOMPROBE_CLI
#error "GEOMPROBE_CLI must be defined by the build"
#endif

namespace testsupport {

inline std::filesystem::path data_dir() { return std::filesystem::path(GEOMPROBE_DATA_DIR); }

inline std::filesystem::path data_path(const std::string& name) { return data_dir() / name; }

inline std::string cli_path() { return GEOMPROBE_CLI; }

// Fresh unique directory under the system temp root. Never removed on
// purpose: the OS temp cleaner owns it, and keeping outputs around makes
// failures inspectable.
inline std::filesystem::path temp_dir() {
  static std::atomic<unsigned> counter{0};
  const unsigned n = counter.fetch_add(1);
  std::filesystem::path dir = std::filesystem::temp_directory_path() /
                              ("geomprobe-test-" + std::to_string(::getpid()) + "-" +
                               std::to_string(n));
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct CliResult {
  int exit_code = -1;
  std::string output;  // stdout only; stderr is discarded
};

// Runs the built CLI with the given argument string through /bin/sh.
inline CliResult run_cli(const std::string& args) {
  const std::string cmd = "\"" + cli_path() + "\" " + args + " 2>/dev/null";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr) throw std::runtime_error("popen failed for: " + cmd);
  CliResult result;
  char buf[4096];
  size_t got = 0;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) {
    result.output.append(buf, got);
  }
  const int status = ::pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

inline std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string current;
  for (char c : text) {
    if (c == '\n') {
      lines.push_back(current);
      current.clear();
    } else {
      current += c;
    }
  }
  if (!current.empty()) lines.push_back(current);
  return lines;
}

// Data rows of one "# section: <title>" block in a CSV report: the lines
// after the header row up to the first blank line or next section marker.
inline std::vector<std::string> csv_section_rows(const std::string& csv, const std::string& title) {
  const std::vector<std::string> lines = split_lines(csv);
  std::vector<std::string> rows;
  bool in_section = false;
  bool past_header = false;
  for (const std::string& line : lines) {
    if (line == "# section: " + title) {
      in_section = true;
      past_header = false;
      continue;
    }
    if (!in_section) continue;
    if (line.empty() || line.rfind("# section: ", 0) == 0) break;
    if (!past_header) {
      past_header = true;  // header row
      continue;
    }
    rows.push_back(line);
  }
  return rows;
}

inline bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

}  // namespace testsupport
