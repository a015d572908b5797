#include <cstdint>
#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <bergman/domain.hpp>
#include <bergman/functionals.hpp>
#include <bergman/harness.hpp>
#include <bergman/report.hpp>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitViolated = 2;
constexpr int kExitSolver = 3;

struct Common {
  std::uint64_t seed = 0;
  bergman::SolverConfig cfg;
};

bergman::DomainSpec load(const std::string& path) {
  try {
    return bergman::load_domain(path);
  } catch (const std::runtime_error& e) {
    throw std::invalid_argument(e.what());
  }
}

void add_common(CLI::App& cmd, Common& common) {
  cmd.add_option("--seed", common.seed, "seed for residual sampling")->capture_default_str();
  cmd.add_option("--epsilon", common.cfg.epsilon, "gradient regularization")->capture_default_str();
  cmd.add_option("--tol", common.cfg.tol, "relative objective decrease that stops the iterations")
      ->capture_default_str();
  cmd.add_option("--max-iter", common.cfg.max_iter, "iteration cap of the nonlinear solvers")->capture_default_str();
}

void print_results(const std::vector<bergman::VerificationResult>& results) {
  for (const auto& r : results)
    std::printf("%-14s p=%-6g %-20s lhs=%.10g rhs=%.10g margin=%.3e tol=%.3e%s%s\n", r.id.c_str(), r.p,
                bergman::to_string(r.verdict), r.lhs, r.rhs, r.margin, r.tolerance, r.diagnostic.empty() ? "" : "  ",
                r.diagnostic.c_str());
}

int run_compute(const std::string& domain, double p, double h, const std::string& out, const std::string& format,
                const std::string& log, const Common& common) {
  const bergman::DomainSpec spec = load(domain);
  bergman::ConstantsReport report;
  try {
    report = bergman::compute_constants(spec, p, h, common.cfg, common.seed);
  } catch (const std::invalid_argument&) {
    throw;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  }
  const auto fmt = bergman::report_format_from_string(format);
  if (out.empty()) {
    std::cout << (fmt == bergman::ReportFormat::json ? bergman::render_json(bergman::to_json(report))
                                                     : bergman::render_csv(bergman::to_table({report})));
  } else if (fmt == bergman::ReportFormat::json) {
    bergman::write_text(out, bergman::render_json(bergman::to_json(report)));
  } else {
    bergman::emit_report({report}, fmt, out);
  }
  if (!log.empty()) {
    bergman::Table t = bergman::iteration_log_table("q_torsion", report.fine.qq_log);
    const bergman::Table bp = bergman::iteration_log_table("lambda_Bp", report.fine.bp_log);
    t.rows.insert(t.rows.end(), bp.rows.begin(), bp.rows.end());
    bergman::write_text(log, bergman::render_csv(t));
  }
  if (!report.converged()) {
    std::cerr << "solver failure: an iteration stopped at max_iter without converging\n";
    return kExitSolver;
  }
  return kExitOk;
}

int run_verify(const std::string& domain, const std::vector<double>& ps, double h, const std::string& out,
               const std::string& format, const std::string& reports_path, std::optional<double> tolerance,
               bool wq_limit, const Common& common) {
  const bergman::DomainSpec spec = load(domain);
  bergman::HarnessOptions options;
  options.cfg = common.cfg;
  options.seed = common.seed;
  options.tolerance = tolerance;
  options.wq_limit = wq_limit;
  const bergman::VerificationRun run = bergman::verify_inequalities(spec, ps, h, options);
  print_results(run.results);
  if (!out.empty()) bergman::emit_report(run.results, bergman::report_format_from_string(format), out);
  if (!reports_path.empty()) bergman::emit_report(run.reports, bergman::ReportFormat::json, reports_path);
  if (run.any_violated()) return kExitViolated;
  if (run.any_solver_failure()) return kExitSolver;
  return kExitOk;
}

int run_converge(const std::string& domain, double p, const std::vector<double>& hs, const std::string& out,
                 const std::string& format, bool with_bp, const Common& common) {
  const bergman::DomainSpec spec = load(domain);
  const bergman::ConvergenceTable table = bergman::convergence_study(spec, p, hs, common.cfg, with_bp);
  const auto fmt = bergman::report_format_from_string(format);
  if (out.empty())
    std::cout << (fmt == bergman::ReportFormat::csv ? bergman::render_csv(bergman::to_table(table))
                                                    : bergman::render_json(bergman::to_json(table)));
  else
    bergman::emit_report(table, fmt, out);
  for (const auto& row : table.rows)
    if (!row.ok) return kExitSolver;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bergman content and St Venant functional calculator"};
  app.require_subcommand(1);
  // --h is the mesh size, so help is long-form only
  app.set_help_flag("--help", "print this help message and exit");
  Common common;

  std::string domain, out, format = "json", log, reports_path;
  double p = 2.0, h = 0.05;
  std::vector<double> p_list, h_list;
  double tolerance = -1.0;
  bool wq_limit = false, with_bp = false;

  auto* compute = app.add_subcommand("compute", "compute every constant for one p");
  compute->add_option("--domain", domain, "domain JSON file")->required();
  compute->add_option("--p", p, "exponent p >= 1")->required();
  compute->add_option("--h", h, "mesh size")->required();
  compute->add_option("--out", out, "report path (stdout when absent)");
  compute->add_option("--format", format, "json or csv")->capture_default_str();
  compute->add_option("--log", log, "iteration log CSV path");
  add_common(*compute, common);

  auto* verify = app.add_subcommand("verify", "check the inequalities for a list of p");
  verify->add_option("--domain", domain, "domain JSON file")->required();
  verify->add_option("--p", p_list, "comma-separated exponents in [1, 4]")->required()->delimiter(',');
  verify->add_option("--h", h, "mesh size")->required();
  verify->add_option("--out", out, "results path");
  verify->add_option("--format", format, "json or csv")->capture_default_str();
  verify->add_option("--reports", reports_path, "also write the constants reports (JSON)");
  verify->add_option("--tolerance", tolerance, "absolute tolerance for every result");
  verify->add_flag("--wq-limit", wq_limit, "also run the w_q -> w_inf suite");
  add_common(*verify, common);

  auto* converge = app.add_subcommand("converge", "convergence study over decreasing mesh sizes");
  converge->add_option("--domain", domain, "domain JSON file")->required();
  converge->add_option("--p", p, "exponent p >= 1")->required();
  converge->add_option("--h", h_list, "comma-separated decreasing mesh sizes")->required()->delimiter(',');
  converge->add_option("--out", out, "table path (stdout when absent)");
  converge->add_option("--format", format, "csv or json");
  converge->add_flag("--with-bp", with_bp, "include lambda_Bp columns");
  add_common(*converge, common);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*compute) return run_compute(domain, p, h, out, format, log, common);
    if (*verify)
      return run_verify(domain, p_list, h, out, format, reports_path,
                        tolerance >= 0.0 ? std::optional<double>(tolerance) : std::nullopt, wq_limit, common);
    if (converge->parsed() && converge->count("--format") == 0) format = "csv";
    return run_converge(domain, p, h_list, out, format, with_bp, common);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  }
}
