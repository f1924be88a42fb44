#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "scenegen/dsl/checker.hpp"
#include "scenegen/dsl/lexer.hpp"
#include "scenegen/dsl/parser.hpp"
#include "scenegen/rng.hpp"

namespace scenegen::dsl {

/// tokenize + parse + check; records the FNV-1a hash of the source bytes.
inline CheckedProgram compile(std::string_view source) {
  CheckedProgram cp = check(parse(tokenize(source)));
  cp.sourceHash = fnv1a64(source.data(), source.size());
  return cp;
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Renders any front-end error as `file:line:col: message` lines.
inline std::string format_diagnostics(const std::string& file, const std::exception& e) {
  if (const auto* cf = dynamic_cast<const CheckFailed*>(&e)) {
    std::string out;
    for (const auto& err : cf->errors()) {
      out += file + ":" + std::to_string(err.line) + ":" + std::to_string(err.col) + ": " +
             kind_name(err.kind) + ": " + err.message + "\n";
    }
    return out;
  }
  if (const auto* se = dynamic_cast<const SourceError*>(&e))
    return file + ":" + std::to_string(se->line()) + ":" + std::to_string(se->col()) + ": " +
           se->message() + "\n";
  return file + ": " + e.what() + "\n";
}

}  // namespace scenegen::dsl
