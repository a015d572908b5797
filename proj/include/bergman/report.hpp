#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include <bergman/functionals.hpp>
#include <bergman/harness.hpp>
#include <bergman/q_torsion.hpp>

namespace bergman {

enum class ReportFormat { json, csv };

ReportFormat report_format_from_string(const std::string& name);

/// Rows of named cells; cells are numbers, strings, booleans or null.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<nlohmann::json>> rows;
};

nlohmann::json to_json(const ConstantsReport& report);
nlohmann::json to_json(const VerificationResult& result);
nlohmann::json to_json(const ConvergenceTable& table);

Table to_table(const std::vector<ConstantsReport>& reports);
Table to_table(const std::vector<VerificationResult>& results);
Table to_table(const ConvergenceTable& table);

/// Iteration log of one solver as a table: iteration, objective, damping (step
/// length taken), residual.
Table iteration_log_table(const std::string& solver, const std::vector<IterationRecord>& log);

/// Deterministic JSON text: keys sorted, two-space indent, numbers with 17
/// significant digits, non-finite numbers as the strings "inf", "-inf", "nan".
std::string render_json(const nlohmann::json& doc);

/// Comma-separated text with a header row; numbers use 17 significant digits.
std::string render_csv(const Table& table);

/// Writes text to path, throwing std::runtime_error naming the path on failure.
void write_text(const std::string& path, const std::string& text);

void emit_report(const std::vector<ConstantsReport>& reports, ReportFormat format, const std::string& path);
void emit_report(const std::vector<VerificationResult>& results, ReportFormat format, const std::string& path);
void emit_report(const ConvergenceTable& table, ReportFormat format, const std::string& path);

}  // namespace bergman
