#include <bergman/report.hpp>

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace bergman {

using nlohmann::json;

namespace {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void render(const json& j, int indent, std::string& out) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += inner + json(it.key()).dump() + ": ";
        render(it.value(), indent + 1, out);
      }
      out += "\n" + pad + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += inner;
        render(j[i], indent + 1, out);
      }
      out += "\n" + pad + "]";
      return;
    }
    case json::value_t::number_float: {
      const double x = j.get<double>();
      out += std::isfinite(x) ? format_number(x) : "\"" + format_number(x) + "\"";
      return;
    }
    default:
      out += j.dump();
  }
}

std::string csv_cell(const json& j) {
  switch (j.type()) {
    case json::value_t::null:
      return "";
    case json::value_t::number_float:
      return format_number(j.get<double>());
    case json::value_t::string: {
      const std::string s = j.get<std::string>();
      if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
      std::string q = "\"";
      for (char ch : s) {
        if (ch == '"') q += '"';
        q += ch;
      }
      return q + "\"";
    }
    default:
      return j.dump();
  }
}

json optional_number(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

json diagnostics_json(const SolveDiagnostics& d) {
  json j;
  j["h"] = d.h;
  j["vertices"] = d.vertices;
  j["triangles"] = d.triangles;
  j["iterations"] = {{"Q_q", d.qq_iterations}, {"lambda_Bp", d.bp_iterations}};
  j["converged"] = {{"Q_q", d.qq_converged}, {"lambda_Bp", d.bp_converged}};
  j["residuals"] = {
      {"q_torsion_weak_residual", d.qq_weak_residual},
      {"q_torsion_final_residual", d.qq_log.empty() ? 0.0 : d.qq_log.back().residual},
      {"lambda_Bp_cross_check", d.bp_cross_check},
  };
  return j;
}

}  // namespace

ReportFormat report_format_from_string(const std::string& name) {
  if (name == "json") return ReportFormat::json;
  if (name == "csv") return ReportFormat::csv;
  throw std::invalid_argument("unknown report format '" + name + "' (expected json or csv)");
}

json to_json(const ConstantsReport& r) {
  json j;
  j["domain"] = r.domain;
  j["p"] = r.p;
  j["q"] = r.q;
  j["Q_q"] = r.Q_q;
  j["Q_q_dual_route"] = optional_number(r.Q_q_dual_route);
  j["Q_q_pairing_route"] = r.Q_q_pairing_route;
  j["rho"] = r.rho;
  j["sqrt_rho"] = r.sqrt_rho;
  j["lambda_B2"] = r.lambda_B2;
  j["lambda_Bp"] = r.lambda_Bp;
  j["lambda_Ap_bracket"] = json::array({r.lambda_Ap_bracket.first, r.lambda_Ap_bracket.second});
  j["r_omega"] = r.r_omega;
  j["Q_q_ball_r_omega"] = r.Q_q_ball_r_omega;
  j["mesh_h"] = r.mesh_h;
  j["estimated_error"] = r.estimated_error;
  j["errors"] = r.errors;
  j["converged"] = r.converged();
  j["seed"] = r.seed;
  const json fine = diagnostics_json(r.fine);
  j["h"] = fine["h"];
  j["iterations"] = fine["iterations"];
  j["residuals"] = fine["residuals"];
  j["solver"] = {{"fine", fine}, {"coarse", diagnostics_json(r.coarse)}};
  return j;
}

json to_json(const VerificationResult& r) {
  return json{{"id", r.id},           {"p", r.p},
              {"lhs", r.lhs},         {"rhs", r.rhs},
              {"margin", r.margin},   {"tolerance", r.tolerance},
              {"verdict", to_string(r.verdict)}, {"diagnostic", r.diagnostic},
              {"solver_failure", r.solver_failure}};
}

json to_json(const ConvergenceTable& t) {
  json rows = json::array();
  for (const auto& row : t.rows) {
    json jr{{"h", row.h}, {"ok", row.ok}, {"vertices", row.vertices}};
    if (!row.error.empty()) jr["error"] = row.error;
    jr["values"] = row.values;
    jr["differences"] = row.differences;
    jr["orders"] = row.orders;
    rows.push_back(std::move(jr));
  }
  return json{{"domain", t.domain}, {"p", t.p}, {"quantities", t.quantities}, {"rows", rows}};
}

Table to_table(const std::vector<ConstantsReport>& reports) {
  Table t;
  t.columns = {"domain",    "p",         "q",
               "Q_q",       "Q_q_dual_route",  "Q_q_pairing_route",
               "rho",       "sqrt_rho",        "lambda_B2",
               "lambda_Bp", "lambda_Ap_lower", "lambda_Ap_upper",
               "r_omega",   "Q_q_ball_r_omega", "mesh_h",
               "estimated_error", "converged"};
  for (const auto& r : reports)
    t.rows.push_back({r.domain, r.p, r.q, r.Q_q, optional_number(r.Q_q_dual_route), r.Q_q_pairing_route, r.rho,
                      r.sqrt_rho, r.lambda_B2, r.lambda_Bp, r.lambda_Ap_bracket.first, r.lambda_Ap_bracket.second,
                      r.r_omega, r.Q_q_ball_r_omega, r.mesh_h, r.estimated_error, r.converged()});
  return t;
}

Table to_table(const std::vector<VerificationResult>& results) {
  Table t;
  t.columns = {"id", "p", "lhs", "rhs", "margin", "tolerance", "verdict", "diagnostic"};
  for (const auto& r : results)
    t.rows.push_back({r.id, r.p, r.lhs, r.rhs, r.margin, r.tolerance, to_string(r.verdict), r.diagnostic});
  return t;
}

Table to_table(const ConvergenceTable& table) {
  Table t;
  t.columns = {"h", "ok", "vertices"};
  for (const auto& q : table.quantities) {
    t.columns.push_back(q);
    t.columns.push_back(q + "_diff");
    t.columns.push_back(q + "_order");
  }
  t.columns.push_back("error");
  auto lookup = [](const std::map<std::string, double>& m, const std::string& k) {
    const auto it = m.find(k);
    return it == m.end() ? json(nullptr) : json(it->second);
  };
  for (const auto& row : table.rows) {
    std::vector<json> cells{row.h, row.ok, row.vertices};
    for (const auto& q : table.quantities) {
      cells.push_back(lookup(row.values, q));
      cells.push_back(lookup(row.differences, q));
      cells.push_back(lookup(row.orders, q));
    }
    cells.push_back(row.error);
    t.rows.push_back(std::move(cells));
  }
  return t;
}

Table iteration_log_table(const std::string& solver, const std::vector<IterationRecord>& log) {
  Table t;
  t.columns = {"solver", "iteration", "objective", "damping", "residual"};
  for (const auto& r : log) t.rows.push_back({solver, r.iteration, r.objective, r.damping, r.residual});
  return t;
}

std::string render_json(const json& doc) {
  std::string out;
  render(doc, 0, out);
  out += "\n";
  return out;
}

std::string render_csv(const Table& table) {
  std::string out;
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out += ',';
    out += csv_cell(table.columns[i]);
  }
  out += '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size()) throw std::logic_error("render_csv: row width differs from header");
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += csv_cell(row[i]);
    }
    out += '\n';
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing: " + std::strerror(errno));
  out << text;
  out.flush();
  if (!out) throw std::runtime_error("failed writing '" + path + "': " + std::strerror(errno));
}

void emit_report(const std::vector<ConstantsReport>& reports, ReportFormat format, const std::string& path) {
  if (format == ReportFormat::csv) return write_text(path, render_csv(to_table(reports)));
  json doc = json::array();
  for (const auto& r : reports) doc.push_back(to_json(r));
  write_text(path, render_json(doc));
}

void emit_report(const std::vector<VerificationResult>& results, ReportFormat format, const std::string& path) {
  if (format == ReportFormat::csv) return write_text(path, render_csv(to_table(results)));
  json doc = json::array();
  for (const auto& r : results) doc.push_back(to_json(r));
  write_text(path, render_json(doc));
}

void emit_report(const ConvergenceTable& table, ReportFormat format, const std::string& path) {
  if (format == ReportFormat::csv) return write_text(path, render_csv(to_table(table)));
  write_text(path, render_json(to_json(table)));
}

}  // namespace bergman
