#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "scenegen/dsl/compile.hpp"
#include "scenegen/rng.hpp"
#include "scenegen/world.hpp"

namespace scenegen::test {

inline std::filesystem::path data_dir() { return SCENEGEN_TEST_DATA; }

/// Valid corpus programs, sorted by name.
inline std::vector<std::filesystem::path> corpus_files() {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(data_dir()))
    if (e.path().extension() == ".scn") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<std::filesystem::path> invalid_corpus_files() {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(data_dir() / "invalid"))
    if (e.path().extension() == ".scn") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

inline dsl::CheckedProgram compile_file(const std::filesystem::path& p) {
  return dsl::compile(dsl::read_text_file(p));
}

inline WorldModel two_lane_world() { return load_world(data_dir() / "worlds" / "two_lane.json"); }

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Relative path -> FNV-1a of the bytes, for every regular file under `root`.
inline std::map<std::string, std::uint64_t> tree_hashes(const std::filesystem::path& root) {
  std::map<std::string, std::uint64_t> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root))
    if (e.is_regular_file()) {
      const std::string b = slurp(e.path());
      out[std::filesystem::relative(e.path(), root).generic_string()] = fnv1a64(b.data(), b.size());
    }
  return out;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("scenegen_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace scenegen::test
