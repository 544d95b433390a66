// Scenario files (JSON) and report serialization.
//
// Matrices are nested arrays of [re, im] pairs (a bare number is read as a
// real entry). Pointer and outcome labels are numbers; the ready label is the
// string "ready". Reports print every floating-point number with 17
// significant digits, independent of the C locale.
#pragma once

#include "measlab/linalg.hpp"
#include "measlab/metrics.hpp"
#include "measlab/model.hpp"
#include "measlab/nogo.hpp"
#include "measlab/optimizer.hpp"

#include <json.hpp>

#include <charconv>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace measlab {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "0.1.0";

/// Malformed scenario: carries a line/column or a field path.
class ScenarioError : public Error {
 public:
  using Error::Error;
};

struct Scenario {
  std::string name;
  MeasurementModel model;
  Eigen::Index grid = kDefaultGrid;
  double exactness_tol = kDefaultExactnessTolerance;
  double degeneracy_tol = kDefaultDegeneracyTolerance;
  std::uint64_t seed = 0;
  /// Number of random coupled models for the nogo sweep, if requested.
  std::optional<std::size_t> sweep_models;
  OptimizerOptions optimizer;
};

namespace scenario_detail {

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
  throw ScenarioError("field '" + path + "': " + what);
}

inline const Json& field(const Json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) fail(path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) fail(path.empty() ? key : path + "." + key, "missing");
  return *it;
}

inline std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

inline std::string index(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

inline double number(const Json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "expected a finite number");
  return v;
}

inline std::int64_t integer(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<std::int64_t>();
}

inline Eigen::Index count(const Json& j, const std::string& path, std::int64_t min) {
  const std::int64_t v = integer(j, path);
  if (v < min) fail(path, "must be at least " + std::to_string(min));
  return static_cast<Eigen::Index>(v);
}

inline Complex complex_entry(const Json& j, const std::string& path) {
  if (j.is_number()) return {number(j, path), 0.0};
  if (!j.is_array() || j.size() != 2) fail(path, "expected [re, im] pair");
  return {number(j[0], index(path, 0)), number(j[1], index(path, 1))};
}

inline ComplexMatrix matrix(const Json& j, const std::string& path, Eigen::Index dim) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != dim) {
    fail(path, "expected " + std::to_string(dim) + " rows");
  }
  ComplexMatrix m(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    const Json& row = j[static_cast<std::size_t>(r)];
    const std::string row_path = index(path, static_cast<std::size_t>(r));
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != dim) {
      fail(row_path, "expected " + std::to_string(dim) + " entries");
    }
    for (Eigen::Index c = 0; c < dim; ++c) {
      m(r, c) = complex_entry(row[static_cast<std::size_t>(c)], index(row_path, static_cast<std::size_t>(c)));
    }
  }
  return m;
}

inline HermitianOperator hermitian(const Json& j, const std::string& path, Eigen::Index dim) {
  ComplexMatrix m = matrix(j, path, dim);
  try {
    return HermitianOperator(std::move(m));
  } catch (const Error& e) {
    fail(path, e.what());
  }
}

inline Label label(const Json& j, const std::string& path) {
  if (j.is_string()) {
    if (j.get<std::string>() == "ready") return Label::ready();
    fail(path, "the only string label is \"ready\"");
  }
  return Label(number(j, path));
}

inline std::vector<Label> labels(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of labels");
  std::vector<Label> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(label(j[i], index(path, i)));
  return out;
}

inline SpectralObservable observable(const Json& j, const std::string& path, Eigen::Index dim,
                                     double degeneracy_tol) {
  if (!j.is_object()) fail(path, "expected an object");
  if (j.contains("basis_labels")) {
    const std::string p = join(path, "basis_labels");
    std::vector<Label> basis = labels(j["basis_labels"], p);
    if (static_cast<Eigen::Index>(basis.size()) != dim) fail(p, "expected " + std::to_string(dim) + " labels");
    return SpectralObservable::from_basis_labels(basis);
  }
  if (j.contains("matrix")) {
    return SpectralObservable::from_operator(hermitian(j["matrix"], join(path, "matrix"), dim), degeneracy_tol);
  }
  std::vector<Label> ls = labels(field(j, "labels", path), join(path, "labels"));
  const Json& ps = field(j, "projectors", path);
  const std::string pp = join(path, "projectors");
  if (!ps.is_array() || ps.size() != ls.size()) fail(pp, "expected one projector per label");
  std::vector<ComplexMatrix> projectors;
  for (std::size_t i = 0; i < ps.size(); ++i) projectors.push_back(matrix(ps[i], index(pp, i), dim));
  return SpectralObservable(std::move(ls), std::move(projectors));
}

inline ComplexVector vector(const Json& j, const std::string& path, Eigen::Index dim) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != dim) {
    fail(path, "expected " + std::to_string(dim) + " amplitudes");
  }
  ComplexVector v(dim);
  for (Eigen::Index k = 0; k < dim; ++k) {
    v(k) = complex_entry(j[static_cast<std::size_t>(k)], index(path, static_cast<std::size_t>(k)));
  }
  return v;
}

inline std::string locate(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

}  // namespace scenario_detail

inline Scenario parse_scenario(const std::string& text) {
  namespace sd = scenario_detail;
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ScenarioError(sd::locate(text, e.byte == 0 ? 0 : e.byte - 1) + ": " + e.what());
  }
  if (!j.is_object()) throw ScenarioError("scenario: top level must be an object");

  Scenario s;
  const Json& name = sd::field(j, "name", "");
  if (!name.is_string()) sd::fail("name", "expected a string");
  s.name = name.get<std::string>();

  if (j.contains("tolerances")) {
    const Json& t = j["tolerances"];
    if (!t.is_object()) sd::fail("tolerances", "expected an object");
    if (t.contains("exactness")) s.exactness_tol = sd::number(t["exactness"], "tolerances.exactness");
    if (t.contains("degeneracy")) s.degeneracy_tol = sd::number(t["degeneracy"], "tolerances.degeneracy");
    if (!(s.exactness_tol > 0.0)) sd::fail("tolerances.exactness", "must be positive");
    if (!(s.degeneracy_tol > 0.0)) sd::fail("tolerances.degeneracy", "must be positive");
  }

  MeasurementModel& m = s.model;
  m.dim_S = sd::count(sd::field(j, "dim_S", ""), "dim_S", 1);
  m.dim_M = sd::count(sd::field(j, "dim_M", ""), "dim_M", 1);
  if (m.composite_dim() > kMaxDim) sd::fail("dim_M", "composite dimension exceeds cap");

  m.observable_A = sd::observable(sd::field(j, "observable_A", ""), "observable_A", m.dim_S, s.degeneracy_tol);
  m.pointer_Z = sd::observable(sd::field(j, "pointer_Z", ""), "pointer_Z", m.dim_M, s.degeneracy_tol);

  const ComplexVector ready = sd::vector(sd::field(j, "ready_state", ""), "ready_state", m.dim_M);
  try {
    m.ready_state = StateVector(ready);
  } catch (const Error& e) {
    sd::fail("ready_state", e.what());
  }

  m.t_end = sd::number(sd::field(j, "t_end", ""), "t_end");
  m.t_persist = sd::number(sd::field(j, "t_persist", ""), "t_persist");

  const Json& h = sd::field(j, "hamiltonian", "");
  const Json& type = sd::field(h, "type", "hamiltonian");
  if (!type.is_string()) sd::fail("hamiltonian.type", "expected a string");
  const std::string kind = type.get<std::string>();
  if (kind == "explicit") {
    m.hamiltonian = sd::hermitian(sd::field(h, "matrix", "hamiltonian"), "hamiltonian.matrix", m.composite_dim());
  } else if (kind == "coupled") {
    const HermitianOperator h_S = sd::hermitian(sd::field(h, "h_S", "hamiltonian"), "hamiltonian.h_S", m.dim_S);
    const HermitianOperator h_M = sd::hermitian(sd::field(h, "h_M", "hamiltonian"), "hamiltonian.h_M", m.dim_M);
    const HermitianOperator g =
        sd::hermitian(sd::field(h, "generator", "hamiltonian"), "hamiltonian.generator", m.dim_M);
    const double mu = sd::number(sd::field(h, "coupling", "hamiltonian"), "hamiltonian.coupling");
    m = build_coupled_model(m.dim_S, m.dim_M, h_S, h_M, mu, g, m.observable_A, m.pointer_Z, m.ready_state,
                            m.t_end, m.t_persist);
  } else if (kind == "zero") {
    m.hamiltonian = HermitianOperator::zero(m.composite_dim());
  } else {
    sd::fail("hamiltonian.type", "expected \"explicit\", \"coupled\" or \"zero\"");
  }

  if (j.contains("grid")) s.grid = sd::count(j["grid"], "grid", 2);
  if (j.contains("seed")) s.seed = static_cast<std::uint64_t>(sd::count(j["seed"], "seed", 0));
  if (j.contains("sweep")) {
    const Json& sw = j["sweep"];
    s.sweep_models = static_cast<std::size_t>(sd::count(sd::field(sw, "models", "sweep"), "sweep.models", 1));
  }
  s.optimizer.grid = s.grid;
  s.optimizer.seed = s.seed;
  if (j.contains("optimizer")) {
    const Json& o = j["optimizer"];
    if (!o.is_object()) sd::fail("optimizer", "expected an object");
    if (o.contains("budget")) s.optimizer.budget = static_cast<std::size_t>(sd::count(o["budget"], "optimizer.budget", 1));
    if (o.contains("restarts")) {
      s.optimizer.restarts = static_cast<std::size_t>(sd::count(o["restarts"], "optimizer.restarts", 1));
    }
    if (o.contains("method")) {
      const Json& meth = o["method"];
      if (meth == "nelder_mead") {
        s.optimizer.method = SearchMethod::NelderMead;
      } else if (meth == "fd_gradient") {
        s.optimizer.method = SearchMethod::FdGradient;
      } else {
        sd::fail("optimizer.method", "expected \"nelder_mead\" or \"fd_gradient\"");
      }
    }
  }
  return s;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError("cannot open scenario file " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str());
}

// ---------------------------------------------------------------- reports

inline Json to_json(const Label& l) {
  if (l.is_ready()) return "ready";
  return l.value();
}

inline Json to_json(const std::vector<LabelValue>& entries) {
  Json out = Json::array();
  for (const auto& e : entries) out.push_back(Json{{"label", to_json(e.label)}, {"value", e.value}});
  return out;
}

inline Json to_json(const ValidationReport& r) {
  return Json{{"ok", r.ok()}, {"violations", r.violations}, {"ground_energy", r.ground_energy}};
}

inline Json to_json(const ErrorReport& r) {
  return Json{{"grid_size", r.grid_size},
              {"measurement", to_json(r.per_lambda_measurement)},
              {"preparation", r.preparation},
              {"persistence", to_json(r.per_lambda_persistence)},
              {"aggregate", r.aggregate}};
}

inline Json to_json(const ContradictionCertificate& c) {
  Json gates = Json::array();
  for (const auto& g : c.gates) {
    gates.push_back(Json{{"label", to_json(g.label)},
                         {"measurement_error", g.measurement_error},
                         {"persistence_error", g.persistence_error},
                         {"confined", g.confined ? Json(*g.confined) : Json(nullptr)},
                         {"forcing", g.forcing ? Json(*g.forcing) : Json(nullptr)},
                         {"ready_overlap", g.ready_overlap},
                         {"gated", g.gated}});
  }
  return Json{{"verdict", to_string(c.verdict)},
              {"tolerance", c.tolerance},
              {"per_lambda_forcing", to_json(c.per_lambda_forcing)},
              {"orthogonality_defect", c.orthogonality_defect},
              {"gates", gates}};
}

inline Json to_json(const SweepSummary& s) {
  return Json{{"models", s.models},
              {"valid_models", s.valid_models},
              {"accurate", s.accurate},
              {"accurate_and_confined", s.accurate_and_confined},
              {"passing_both_gates", s.passing_both_gates},
              {"contradictions", s.contradictions},
              {"min_measurement_error", s.min_measurement_error}};
}

inline Json to_json(const OptimizationResult& r) {
  Json history = Json::array();
  for (const auto& h : r.history) history.push_back(Json::array({h.evaluation, h.objective}));
  return Json{{"best_objective", r.best_objective},
              {"evaluations", r.evaluations},
              {"restarts", r.restarts},
              {"seed", r.seed},
              {"best_params", r.best_params},
              {"history", history}};
}

inline Json to_json(const ScanRow& row) {
  return Json{{"dim_M", row.dim_M},
              {"floor", row.floor},
              {"budget", row.budget},
              {"restarts", row.restarts},
              {"seed", row.seed}};
}

namespace scenario_detail {

inline void write_number(std::string& out, double v) {
  if (!std::isfinite(v)) {
    out += "null";
    return;
  }
  char buffer[40];
  const auto res = std::to_chars(buffer, buffer + sizeof buffer, v, std::chars_format::general, 17);
  std::string_view text(buffer, static_cast<std::size_t>(res.ptr - buffer));
  out += text;
  // Keep a marker that this is a floating-point value.
  if (text.find_first_of(".eEn") == std::string_view::npos) out += ".0";
}

inline void write_string(std::string& out, const std::string& s) {
  out += '"';
  for (const unsigned char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (c < 0x20) {
          char esc[8];
          std::snprintf(esc, sizeof esc, "\\u%04x", c);
          out += esc;
        } else {
          out += static_cast<char>(c);
        }
    }
  }
  out += '"';
}

inline void write(std::string& out, const Json& j, int depth) {
  const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(2 * depth), ' ');
  switch (j.type()) {
    case Json::value_t::null: out += "null"; break;
    case Json::value_t::boolean: out += j.get<bool>() ? "true" : "false"; break;
    case Json::value_t::number_integer: out += std::to_string(j.get<std::int64_t>()); break;
    case Json::value_t::number_unsigned: out += std::to_string(j.get<std::uint64_t>()); break;
    case Json::value_t::number_float: write_number(out, j.get<double>()); break;
    case Json::value_t::string: write_string(out, j.get<std::string>()); break;
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        break;
      }
      const bool flat = std::all_of(j.begin(), j.end(), [](const Json& e) { return e.is_primitive(); });
      out += '[';
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += flat ? ", " : ",";
        if (!flat) out += "\n" + pad;
        write(out, e, depth + 1);
        first = false;
      }
      if (!flat) out += "\n" + close;
      out += ']';
      break;
    }
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        break;
      }
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        out += "\n" + pad;
        write_string(out, it.key());
        out += ": ";
        write(out, it.value(), depth + 1);
        first = false;
      }
      out += "\n" + close + '}';
      break;
    }
    default: out += "null"; break;
  }
}

}  // namespace scenario_detail

/// Indented JSON with 17-significant-digit floats.
inline std::string dump_report(const Json& j) {
  std::string out;
  scenario_detail::write(out, j, 0);
  out += '\n';
  return out;
}

/// CSV table for a dimension scan: dim_M,floor,budget,restarts,seed.
inline std::string scan_csv(const std::vector<ScanRow>& rows) {
  std::string out = "dim_M,floor,budget,restarts,seed\n";
  for (const auto& r : rows) {
    out += std::to_string(r.dim_M) + ',';
    scenario_detail::write_number(out, r.floor);
    out += ',' + std::to_string(r.budget) + ',' + std::to_string(r.restarts) + ',' + std::to_string(r.seed) + '\n';
  }
  return out;
}

}  // namespace measlab
