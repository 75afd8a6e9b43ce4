#include "fhc/config.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace fhc {

namespace {

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace((unsigned char)s[b])) ++b;
  while (e > b && std::isspace((unsigned char)s[e - 1])) --e;
  return s.substr(b, e - b);
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  if (!std::isalpha((unsigned char)k[0]) && k[0] != '_') return false;
  for (char c : k)
    if (!std::isalnum((unsigned char)c) && c != '_') return false;
  return true;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Splits a list value on commas and/or whitespace.
std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : v) {
    if (c == ',' || std::isspace((unsigned char)c)) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// Field-aware value readers; every failure names the field and line.
struct Reader {
  const ParsedConfig& pc;
  std::string field;
  int line() const { return pc.line_of(field); }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(field, line(), msg);
  }
  double as_double(const std::string& tok) const {
    const char* p = tok.c_str();
    char* end = nullptr;
    double v = std::strtod(p, &end);
    if (end == p || *end != '\0') fail("expected a number, got '" + tok + "'");
    return v;
  }
  int as_int(const std::string& tok) const {
    int v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || p != tok.data() + tok.size())
      fail("expected an integer, got '" + tok + "'");
    return v;
  }
};

}  // namespace

ConfigError::ConfigError(std::string field_, int line_, const std::string& msg)
    : std::runtime_error(line_ > 0
                             ? "config error at line " + std::to_string(line_) +
                                   ", field '" + field_ + "': " + msg
                             : "config error, field '" + field_ + "': " + msg),
      field(std::move(field_)),
      line(line_) {}

const std::string* ParsedConfig::find(const std::string& key) const {
  auto it = values.find(key);
  return it == values.end() ? nullptr : &it->second;
}

int ParsedConfig::line_of(const std::string& key) const {
  auto it = lines.find(key);
  return it == lines.end() ? 0 : it->second;
}

ParsedConfig parse_config_text(const std::string& text) {
  ParsedConfig pc;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::string line = trim(raw);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(line.substr(0, line.find_first_of(" \t")), lineno,
                        "expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (!valid_key(key))
      throw ConfigError(key, lineno, "malformed field name");
    if (pc.values.count(key))
      throw ConfigError(key, lineno,
                        "duplicate field (first set at line " +
                            std::to_string(pc.line_of(key)) + ")");
    pc.values[key] = val;
    pc.lines[key] = lineno;
  }
  return pc;
}

ParsedConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", 0, "cannot open file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string problem_name(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::manufactured_1d: return "manufactured-1d";
    case ProblemKind::manufactured_2d_I: return "manufactured-2d-I";
    case ProblemKind::problem_2d_II: return "problem-2d-II";
  }
  return "?";
}

std::string study_name(StudyKind kind) {
  return kind == StudyKind::spatial ? "spatial" : "temporal";
}

int problem_dimension(ProblemKind kind) {
  return kind == ProblemKind::manufactured_1d ? 1 : 2;
}

RunConfig run_config_from(const ParsedConfig& pc) {
  static const char* known[] = {
      "problem",       "study",          "dimension",
      "s",             "mu",             "a",
      "b",             "T",              "kappa",
      "epsilon",       "levels",         "temporal_mesh_level",
      "temporal_steps","opt_tol",        "opt_max_iter",
      "quad_regular",  "quad_singular",  "near_field_threshold",
      "ud_time_average", "seed",         "out_dir"};
  for (const auto& [key, val] : pc.values) {
    (void)val;
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ConfigError(key, pc.line_of(key), "unknown field");
  }

  RunConfig rc;
  StudyConfig& sc = rc.study;

  {
    Reader r{pc, "problem"};
    const std::string* v = pc.find("problem");
    if (!v) throw ConfigError("problem", 0, "missing required field");
    if (*v == "manufactured-1d") sc.problem = ProblemKind::manufactured_1d;
    else if (*v == "manufactured-2d-I") sc.problem = ProblemKind::manufactured_2d_I;
    else if (*v == "problem-2d-II") sc.problem = ProblemKind::problem_2d_II;
    else
      r.fail("expected one of manufactured-1d, manufactured-2d-I, "
             "problem-2d-II; got '" + *v + "'");
  }
  if (const std::string* v = pc.find("study")) {
    Reader r{pc, "study"};
    if (*v == "spatial") sc.study = StudyKind::spatial;
    else if (*v == "temporal") sc.study = StudyKind::temporal;
    else r.fail("expected spatial or temporal, got '" + *v + "'");
  }
  rc.dimension = problem_dimension(sc.problem);
  if (const std::string* v = pc.find("dimension")) {
    Reader r{pc, "dimension"};
    int d = r.as_int(*v);
    if (d != 1 && d != 2) r.fail("expected 1 or 2");
    if (d != rc.dimension)
      r.fail("problem '" + problem_name(sc.problem) + "' is " +
             std::to_string(rc.dimension) + "-dimensional");
  }

  if (const std::string* v = pc.find("s")) {
    Reader r{pc, "s"};
    sc.s_values.clear();
    for (const auto& tok : split_list(*v)) {
      double s = r.as_double(tok);
      if (!(s > 0.0 && s < 1.0)) r.fail("every s must lie in (0,1)");
      sc.s_values.push_back(s);
    }
    if (sc.s_values.empty()) r.fail("empty list");
  }

  auto scalar = [&](const char* key, double& dst) {
    if (const std::string* v = pc.find(key)) {
      Reader r{pc, key};
      dst = r.as_double(*v);
    }
  };
  scalar("mu", sc.mu);
  scalar("a", sc.a);
  scalar("b", sc.b);
  scalar("T", sc.T);
  scalar("kappa", sc.kappa);
  scalar("epsilon", sc.epsilon);
  scalar("opt_tol", sc.opt_tol);
  scalar("near_field_threshold", sc.quad.near_field_threshold);

  auto int_list = [&](const char* key, std::vector<int>& dst) {
    if (const std::string* v = pc.find(key)) {
      Reader r{pc, key};
      dst.clear();
      for (const auto& tok : split_list(*v)) {
        int n = r.as_int(tok);
        if (n < 1) r.fail("entries must be >= 1");
        dst.push_back(n);
      }
      if (dst.empty()) r.fail("empty list");
      for (size_t i = 1; i < dst.size(); ++i)
        if (dst[i] <= dst[i - 1]) r.fail("entries must be strictly increasing");
    }
  };
  int_list("levels", sc.levels);
  int_list("temporal_steps", sc.temporal_steps);

  auto int_scalar = [&](const char* key, int& dst, int lo) {
    if (const std::string* v = pc.find(key)) {
      Reader r{pc, key};
      int n = r.as_int(*v);
      if (n < lo) r.fail("must be >= " + std::to_string(lo));
      dst = n;
    }
  };
  int_scalar("temporal_mesh_level", sc.temporal_mesh_level, 1);
  int_scalar("opt_max_iter", sc.opt_max_iter, 1);
  int_scalar("quad_regular", sc.quad.gauss_order_regular, 1);
  int_scalar("quad_singular", sc.quad.gauss_order_singular, 1);

  if (const std::string* v = pc.find("ud_time_average")) {
    Reader r{pc, "ud_time_average"};
    if (*v == "true" || *v == "1" || *v == "yes") sc.ud_time_average = true;
    else if (*v == "false" || *v == "0" || *v == "no") sc.ud_time_average = false;
    else r.fail("expected true or false, got '" + *v + "'");
  }
  if (const std::string* v = pc.find("seed")) {
    Reader r{pc, "seed"};
    long n = r.as_int(*v);
    if (n < 0) r.fail("must be >= 0");
    sc.seed = (unsigned)n;
  }
  if (const std::string* v = pc.find("out_dir")) {
    if (v->empty()) throw ConfigError("out_dir", pc.line_of("out_dir"), "empty path");
    rc.out_dir = *v;
  }

  // Cross-field checks, attributed to the most specific field present.
  auto check = [&](bool ok, const char* key, const std::string& msg) {
    if (!ok) throw ConfigError(key, pc.line_of(key), msg);
  };
  check(sc.a <= sc.b, "a", "control bounds require a <= b");
  check(sc.T > 0.0, "T", "horizon must be positive");
  check(sc.mu > 0.0, "mu", "regularization weight must be positive");
  check(sc.kappa >= 1.0, "kappa", "grading exponent must be >= 1");
  check(sc.epsilon > 0.0 && sc.epsilon < 0.5, "epsilon", "must lie in (0, 0.5)");
  check(sc.kappa == 1.0 || rc.dimension == 2, "kappa",
        "grading applies to the disc problems only");
  try {
    sc.validate();
  } catch (const std::exception& e) {
    throw ConfigError("config", 0, e.what());
  }
  return rc;
}

std::string render_config(const RunConfig& rc) {
  const StudyConfig& sc = rc.study;
  std::ostringstream out;
  auto list_d = [](const std::vector<double>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i)
      s += (i ? ", " : "") + fmt_double(v[i]);
    return s;
  };
  auto list_i = [](const std::vector<int>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i)
      s += (i ? ", " : "") + std::to_string(v[i]);
    return s;
  };
  out << "problem = " << problem_name(sc.problem) << "\n";
  out << "study = " << study_name(sc.study) << "\n";
  out << "dimension = " << rc.dimension << "\n";
  out << "s = " << list_d(sc.s_values) << "\n";
  out << "mu = " << fmt_double(sc.mu) << "\n";
  out << "a = " << fmt_double(sc.a) << "\n";
  out << "b = " << fmt_double(sc.b) << "\n";
  out << "T = " << fmt_double(sc.T) << "\n";
  out << "kappa = " << fmt_double(sc.kappa) << "\n";
  out << "epsilon = " << fmt_double(sc.epsilon) << "\n";
  out << "levels = " << list_i(sc.levels) << "\n";
  out << "temporal_mesh_level = " << sc.temporal_mesh_level << "\n";
  out << "temporal_steps = " << list_i(sc.temporal_steps) << "\n";
  out << "opt_tol = " << fmt_double(sc.opt_tol) << "\n";
  out << "opt_max_iter = " << sc.opt_max_iter << "\n";
  out << "quad_regular = " << sc.quad.gauss_order_regular << "\n";
  out << "quad_singular = " << sc.quad.gauss_order_singular << "\n";
  out << "near_field_threshold = " << fmt_double(sc.quad.near_field_threshold)
      << "\n";
  out << "ud_time_average = " << (sc.ud_time_average ? "true" : "false") << "\n";
  out << "seed = " << sc.seed << "\n";
  out << "out_dir = " << rc.out_dir << "\n";
  return out.str();
}

std::string render_manifest(const RunConfig& rc, const std::string& command) {
  std::ostringstream out;
  out << "# fhc " << kVersion << "\n";
  out << "# compiler: " << __VERSION__ << "\n";
  out << "# command: " << command << "\n";
  out << "# reproduce: fhc_cli " << command << " --config <this file>\n";
  out << render_config(rc);
  return out.str();
}

}  // namespace fhc
