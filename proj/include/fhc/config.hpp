#pragma once

#include <map>
#include <stdexcept>
#include <string>

#include "fhc/study.hpp"

namespace fhc {

inline constexpr const char* kVersion = "1.0.0";

// Raised for any malformed or inconsistent configuration; carries the
// offending field and the 1-based line it came from (0 when the field is
// absent from the file altogether).
struct ConfigError : std::runtime_error {
  ConfigError(std::string field_, int line_, const std::string& msg);
  std::string field;
  int line;
};

// Key/value pairs from a flat "key = value" file, with source lines kept
// for diagnostics.  '#' starts a comment; blank lines are skipped.
struct ParsedConfig {
  std::map<std::string, std::string> values;
  std::map<std::string, int> lines;
  const std::string* find(const std::string& key) const;
  int line_of(const std::string& key) const;
};

ParsedConfig parse_config_text(const std::string& text);
ParsedConfig parse_config_file(const std::string& path);

// Full run description: the study parameters plus where to put outputs.
struct RunConfig {
  StudyConfig study;
  int dimension = 1;  // derived from the problem; a config key may pin it
  std::string out_dir = "out";
};

// Applies defaults, converts and validates every recognized key, and
// rejects unknown keys.  Throws ConfigError.
RunConfig run_config_from(const ParsedConfig& pc);

std::string problem_name(ProblemKind kind);
std::string study_name(StudyKind kind);
int problem_dimension(ProblemKind kind);

// Round-trippable rendering of the resolved configuration: feeding the
// result back through parse_config_text/run_config_from reproduces the
// run exactly.
std::string render_config(const RunConfig& rc);

// Manifest = resolved config plus version and invocation comments.
std::string render_manifest(const RunConfig& rc, const std::string& command);

}  // namespace fhc
