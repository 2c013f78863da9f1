#include "matsol/scenario_io.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace matsol {

namespace {

std::string located(ParseErrorKind kind, const std::string& msg, int line, int column) {
  std::ostringstream os;
  os << to_string(kind) << " error";
  if (line > 0) os << " at line " << line << ", column " << column;
  os << ": " << msg;
  return os.str();
}

[[noreturn]] void schema_error(const YAML::Node& node, const std::string& msg) {
  const YAML::Mark m = node.Mark();
  throw ScenarioParseError(ParseErrorKind::schema, msg, m.line + 1, m.column + 1);
}

void require_map(const YAML::Node& node, const std::string& what) {
  if (!node.IsMap()) schema_error(node, what + " must be a mapping");
}

void require_sequence(const YAML::Node& node, const std::string& what) {
  if (!node.IsSequence()) schema_error(node, what + " must be a list");
}

YAML::Node required(const YAML::Node& map, const char* key, const std::string& where) {
  YAML::Node n = map[key];
  if (!n) schema_error(map, "missing required key `" + std::string(key) + "` in " + where);
  return n;
}

void reject_unknown(const YAML::Node& map, std::initializer_list<const char*> keys, const std::string& where) {
  for (const auto& kv : map) {
    const std::string k = kv.first.as<std::string>();
    bool known = false;
    for (const char* allowed : keys) known = known || k == allowed;
    if (!known) schema_error(kv.first, "unknown key `" + k + "` in " + where);
  }
}

double real_scalar(const YAML::Node& n, const std::string& what) {
  if (!n.IsScalar()) schema_error(n, what + " must be a number");
  try {
    return n.as<double>();
  } catch (const YAML::Exception&) {
    schema_error(n, what + " must be a number, got `" + n.Scalar() + "`");
  }
}

// A bare real or a [re, im] pair.
Complex complex_value(const YAML::Node& n, const std::string& what) {
  if (n.IsScalar()) return real_scalar(n, what);
  if (n.IsSequence() && n.size() == 2) return {real_scalar(n[0], what), real_scalar(n[1], what)};
  schema_error(n, what + " must be a real number or a [re, im] pair");
}

std::size_t count_value(const YAML::Node& n, const std::string& what) {
  if (!n.IsScalar()) schema_error(n, what + " must be a positive integer");
  long long v = 0;
  try {
    v = n.as<long long>();
  } catch (const YAML::Exception&) {
    schema_error(n, what + " must be a positive integer, got `" + n.Scalar() + "`");
  }
  if (v < 1) schema_error(n, what + " must be a positive integer");
  return static_cast<std::size_t>(v);
}

struct Axis {
  double lo, hi;
  std::size_t n;
};

Axis axis(const YAML::Node& grid, const char* key) {
  const YAML::Node a = required(grid, key, "grid");
  const std::string what = std::string("grid.") + key;
  if (!a.IsSequence() || a.size() != 3) schema_error(a, what + " must be [min, max, count]");
  return {real_scalar(a[0], what + " min"), real_scalar(a[1], what + " max"), count_value(a[2], what + " count")};
}

ComplexMatrix matrix_value(const YAML::Node& n, std::size_t d, const std::string& what) {
  require_sequence(n, what);
  if (n.size() != d) {
    schema_error(n, what + " has " + std::to_string(n.size()) + " rows, expected d = " + std::to_string(d));
  }
  ComplexMatrix m(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    const YAML::Node row = n[i];
    require_sequence(row, what + " row " + std::to_string(i + 1));
    if (row.size() != d) {
      schema_error(row, what + " row " + std::to_string(i + 1) + " has " + std::to_string(row.size()) +
                            " entries, expected d = " + std::to_string(d));
    }
    for (std::size_t j = 0; j < d; ++j) m(i, j) = complex_value(row[j], what + " entry");
  }
  return m;
}

std::string number(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string complex_text(Complex z) {
  if (z.imag() == 0.0) return number(z.real());
  return "[" + number(z.real()) + ", " + number(z.imag()) + "]";
}

Scenario two_soliton_preset(const std::string& label, const ComplexMatrix& w) {
  Scenario s;
  s.d = w.rows();
  s.entries = {{1.0, w}, {2.0, w}};
  s.grid = {-15.0, 15.0, 601, -6.0, 6.0, 241};
  s.label = label;
  s.options.imaginary_weights = true;
  return s;
}

}  // namespace

const char* to_string(ParseErrorKind k) noexcept {
  switch (k) {
    case ParseErrorKind::syntax: return "syntax";
    case ParseErrorKind::schema: return "schema";
    case ParseErrorKind::validation: return "validation";
  }
  return "unknown";
}

ScenarioParseError::ScenarioParseError(ParseErrorKind kind, const std::string& message, int line, int column,
                                       std::vector<ValidationIssue> issues)
    : Error(located(kind, message, line, column)),
      kind_(kind),
      line_(line),
      column_(column),
      detail_(message),
      issues_(std::move(issues)) {}

Scenario parse_scenario(const std::string& document) {
  YAML::Node root;
  try {
    root = YAML::Load(document);
  } catch (const YAML::ParserException& e) {
    throw ScenarioParseError(ParseErrorKind::syntax, e.msg, e.mark.line + 1, e.mark.column + 1);
  }
  if (!root || root.IsNull()) throw ScenarioParseError(ParseErrorKind::schema, "empty document", 1, 1);
  require_map(root, "scenario document");
  reject_unknown(root, {"d", "solitons", "grid", "options"}, "scenario document");

  Scenario s;
  const YAML::Node d = required(root, "d", "scenario document");
  s.d = count_value(d, "d");

  const YAML::Node sol = required(root, "solitons", "scenario document");
  require_sequence(sol, "solitons");
  for (std::size_t j = 0; j < sol.size(); ++j) {
    const YAML::Node e = sol[j];
    const std::string where = "soliton " + std::to_string(j + 1);
    require_map(e, where);
    reject_unknown(e, {"k", "B"}, where);
    const Complex k = complex_value(required(e, "k", where), where + " k");
    s.entries.push_back({k, matrix_value(required(e, "B", where), s.d, where + " B")});
  }

  const YAML::Node grid = required(root, "grid", "scenario document");
  require_map(grid, "grid");
  reject_unknown(grid, {"x", "t"}, "grid");
  const Axis ax = axis(grid, "x"), at = axis(grid, "t");
  s.grid = {ax.lo, ax.hi, ax.n, at.lo, at.hi, at.n};

  if (const YAML::Node opt = root["options"]) {
    require_map(opt, "options");
    reject_unknown(opt, {"imaginary_weights", "path", "label"}, "options");
    if (const YAML::Node iw = opt["imaginary_weights"]) {
      try {
        s.options.imaginary_weights = iw.as<bool>();
      } catch (const YAML::Exception&) {
        schema_error(iw, "options.imaginary_weights must be true or false");
      }
    }
    if (const YAML::Node p = opt["path"]) {
      const std::string v = p.IsScalar() ? p.Scalar() : "";
      if (v == "det") {
        s.options.path = EvalPath::det;
      } else if (v == "fast") {
        s.options.path = EvalPath::fast;
      } else {
        schema_error(p, "options.path must be `det` or `fast`");
      }
    }
    if (const YAML::Node l = opt["label"]) {
      if (!l.IsScalar()) schema_error(l, "options.label must be text");
      s.label = l.Scalar();
    }
  }

  auto issues = check_scenario(s);
  for (const auto& issue : issues) {
    if (issue.severity != Severity::error) continue;
    YAML::Node at_node = root;
    if (issue.entry && *issue.entry < sol.size()) {
      at_node = sol[*issue.entry];
    } else if (issue.code == IssueCode::bad_grid) {
      at_node = grid;
    } else if (issue.code == IssueCode::size_mismatch) {
      at_node = d;
    }
    std::string msg;
    for (const auto& i : issues)
      if (i.severity == Severity::error) msg += (msg.empty() ? "" : "; ") + i.message;
    const YAML::Mark m = at_node.Mark();
    throw ScenarioParseError(ParseErrorKind::validation, msg, m.line + 1, m.column + 1, std::move(issues));
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read scenario file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("error while reading " + path.string());
  return parse_scenario(buf.str());
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"fig2", "fig3", "fig4", "scalar1", "scalar2"};
  return names;
}

Scenario preset(const std::string& name) {
  if (name == "fig2") {
    return two_soliton_preset(name, ComplexMatrix{{1.0, 0.0, 0.0}, {0.0, 0.0, 0.0}, {0.0, 0.0, 1.0}});
  }
  if (name == "fig3") {
    return two_soliton_preset(name, ComplexMatrix{{1.0, 1.0, 1.0}, {1.0, 1.0, 1.0}, {1.0, 1.0, 1.0}});
  }
  if (name == "fig4") {
    return two_soliton_preset(name, ComplexMatrix{{1.0, 1.0, 0.0}, {0.0, 1.0, 1.0}, {0.0, 0.0, 1.0}});
  }
  Scenario s;
  s.d = 1;
  s.label = name;
  s.options.imaginary_weights = true;
  if (name == "scalar1") {
    s.entries = {{1.0, ComplexMatrix{{1.0}}}};
    s.grid = {-10.0, 10.0, 401, -5.0, 5.0, 101};
    return s;
  }
  if (name == "scalar2") {
    s.entries = {{1.0, ComplexMatrix{{1.0}}}, {2.0, ComplexMatrix{{1.0}}}};
    s.grid = {-30.0, 30.0, 1201, -4.0, 4.0, 161};
    return s;
  }
  std::string known;
  for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
  throw Error("unknown preset `" + name + "` (known: " + known + ")");
}

std::string scenario_to_yaml(const Scenario& s) {
  std::ostringstream os;
  os << "d: " << s.d << "\n";
  os << "solitons:\n";
  for (const auto& e : s.entries) {
    os << "  - k: [" << number(e.k.real()) << ", " << number(e.k.imag()) << "]\n";
    os << "    B:\n";
    for (std::size_t i = 0; i < e.weight.rows(); ++i) {
      os << "      - [";
      for (std::size_t j = 0; j < e.weight.cols(); ++j) os << (j ? ", " : "") << complex_text(e.weight(i, j));
      os << "]\n";
    }
  }
  os << "grid:\n";
  os << "  x: [" << number(s.grid.x_min) << ", " << number(s.grid.x_max) << ", " << s.grid.nx << "]\n";
  os << "  t: [" << number(s.grid.t_min) << ", " << number(s.grid.t_max) << ", " << s.grid.nt << "]\n";
  os << "options:\n";
  os << "  imaginary_weights: " << (s.options.imaginary_weights ? "true" : "false") << "\n";
  os << "  path: " << (s.options.path == EvalPath::det ? "det" : "fast") << "\n";
  if (!s.label.empty()) os << "  label: " << YAML::Dump(YAML::Node(s.label)) << "\n";
  return os.str();
}

}  // namespace matsol
