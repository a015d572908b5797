#include <bergman/harness.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <bergman/mesh.hpp>
#include <bergman/oracles.hpp>

namespace bergman {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::holds:
      return "holds";
    case Verdict::holds_with_equality:
      return "holds_with_equality";
    case Verdict::violated:
      return "violated";
    case Verdict::inconclusive:
      return "inconclusive";
  }
  return "unknown";
}

VerificationResult check_ordered(std::string id, double p, double lhs, double rhs, double tol,
                                 bool equality_admissible) {
  VerificationResult r;
  r.id = std::move(id);
  r.p = p;
  r.lhs = lhs;
  r.rhs = rhs;
  r.margin = rhs - lhs;
  r.tolerance = tol;
  if (!std::isfinite(r.margin))
    r.verdict = Verdict::inconclusive;
  else if (r.margin < -tol)
    r.verdict = Verdict::violated;
  else if (r.margin <= tol)
    r.verdict = equality_admissible ? Verdict::holds_with_equality : Verdict::inconclusive;
  else
    r.verdict = Verdict::holds;
  return r;
}

VerificationResult check_equal(std::string id, double p, double lhs, double rhs, double tol) {
  VerificationResult r;
  r.id = std::move(id);
  r.p = p;
  r.lhs = lhs;
  r.rhs = rhs;
  r.margin = std::abs(lhs - rhs);
  r.tolerance = tol;
  if (!std::isfinite(r.margin))
    r.verdict = Verdict::inconclusive;
  else
    r.verdict = r.margin <= tol ? Verdict::holds_with_equality : Verdict::violated;
  return r;
}

VerificationResult check_strictly_less(std::string id, double p, double lhs, double rhs) {
  VerificationResult r;
  r.id = std::move(id);
  r.p = p;
  r.lhs = lhs;
  r.rhs = rhs;
  r.margin = rhs - lhs;
  r.tolerance = 0.0;
  r.verdict = !std::isfinite(r.margin) ? Verdict::inconclusive : r.margin > 0.0 ? Verdict::holds : Verdict::violated;
  return r;
}

bool VerificationRun::any_violated() const {
  return std::any_of(results.begin(), results.end(), [](const auto& r) { return r.verdict == Verdict::violated; });
}

bool VerificationRun::any_solver_failure() const {
  return std::any_of(results.begin(), results.end(), [](const auto& r) { return r.solver_failure; });
}

namespace {

std::string describe_p(double p) {
  std::ostringstream s;
  s << p;
  return s.str();
}

VerificationResult failed(std::string id, double p, const std::string& why) {
  VerificationResult r;
  r.id = std::move(id);
  r.p = p;
  r.lhs = r.rhs = r.margin = std::nan("");
  r.verdict = Verdict::inconclusive;
  r.diagnostic = why;
  r.solver_failure = true;
  return r;
}

std::vector<std::string> applicable_ids(const DomainSpec& spec, double p) {
  std::vector<std::string> ids{"LAP"};
  if (p <= 2.0) ids.push_back(p == 1.0 ? "LAP1" : "LBineq");
  if (p == 2.0) {
    ids.push_back("L2eq");
    ids.push_back("TOR_EQUALITY");
  }
  ids.push_back("FABER_KRAHN");
  if (spec.kind() == DomainKind::disk) ids.push_back("BALL_EQUALITY");
  return ids;
}

}  // namespace

VerificationRun verify_inequalities(const DomainSpec& spec, const std::vector<double>& p_list, double h,
                                    const HarnessOptions& options) {
  for (double p : p_list)
    if (!(p >= 1.0 && p <= 4.0)) throw std::invalid_argument("verify_inequalities: every p must lie in [1, 4]");
  options.cfg.validate();

  const bool is_disk = spec.kind() == DomainKind::disk;
  const bool is_annulus = spec.kind() == DomainKind::annulus;
  const std::size_t holes = spec.hole_count();
  VerificationRun run;

  for (double p : p_list) {
    ConstantsReport rep;
    try {
      rep = compute_constants(spec, p, h, options.cfg, options.seed);
    } catch (const std::exception& e) {
      for (const auto& id : applicable_ids(spec, p)) run.results.push_back(failed(id, p, e.what()));
      continue;
    }
    const bool qq_ok = rep.fine.qq_converged && rep.coarse.qq_converged;
    const bool bp_ok = rep.fine.bp_converged && rep.coarse.bp_converged;
    auto tol = [&](std::initializer_list<const char*> names) {
      if (options.tolerance) return *options.tolerance;
      double s = 0.0;
      for (const char* n : names) s += rep.error_of(n);
      return options.tolerance_factor * s;
    };
    auto push = [&](VerificationResult r, bool ok, const char* what) {
      if (!ok) {
        r.verdict = Verdict::inconclusive;
        r.solver_failure = true;
        r.diagnostic = std::string(what) + " did not converge";
      }
      run.results.push_back(std::move(r));
    };

    push(check_ordered("LAP", p, rep.Q_q, rep.lambda_Bp, tol({"Q_q", "lambda_Bp"}),
                       p == 2.0 || is_disk || is_annulus),
         qq_ok && bp_ok, "q-torsion or lambda_Bp");
    if (p <= 2.0)
      push(check_ordered(p == 1.0 ? "LAP1" : "LBineq", p, rep.lambda_Bp, rep.Q_q_ball_r_omega, tol({"lambda_Bp"}),
                         is_disk),
           bp_ok, "lambda_Bp");
    if (p == 2.0) {
      push(check_equal("L2eq", p, rep.lambda_B2, rep.Q_q, tol({"lambda_B2", "Q_q"})), qq_ok, "q-torsion");
      VerificationResult tor;
      if (holes == 0) {
        tor = check_equal("TOR_EQUALITY", p, rep.Q_q, rep.sqrt_rho, tol({"Q_q", "sqrt_rho"}));
        tor.diagnostic = "complement connected: expected Q_2 = sqrt(rho)";
      } else {
        tor = check_ordered("TOR_EQUALITY", p, rep.sqrt_rho, rep.Q_q, tol({"Q_q", "sqrt_rho"}), false);
        tor.diagnostic = "complement has " + std::to_string(holes) +
                         " bounded component(s): expected Q_2 > sqrt(rho); observed Q_2 - sqrt(rho) = " +
                         describe_p(rep.Q_q - rep.sqrt_rho);
      }
      push(std::move(tor), qq_ok, "q-torsion");
    }
    push(check_ordered("FABER_KRAHN", p, rep.Q_q, rep.Q_q_ball_r_omega, tol({"Q_q"}), is_disk), qq_ok,
         "q-torsion");
    if (is_disk)
      push(check_equal("BALL_EQUALITY", p, rep.lambda_Bp, rep.Q_q, tol({"lambda_Bp", "Q_q"})), qq_ok && bp_ok,
           "q-torsion or lambda_Bp");
    run.reports.push_back(std::move(rep));
  }

  std::vector<const ConstantsReport*> by_p;
  for (const auto& r : run.reports) by_p.push_back(&r);
  std::sort(by_p.begin(), by_p.end(), [](const auto* a, const auto* b) { return a->p < b->p; });
  const double volume = spec.volume();
  for (std::size_t k = 0; k + 1 < by_p.size(); ++k) {
    const ConstantsReport& a = *by_p[k];
    const ConstantsReport& b = *by_p[k + 1];
    if (a.p == b.p) continue;
    const double sa = std::pow(volume, -1.0 / a.p), sb = std::pow(volume, -1.0 / b.p);
    const double tol = options.tolerance ? *options.tolerance
                                         : options.monotone_factor * (sa * a.estimated_error + sb * b.estimated_error);
    auto r = check_ordered("MONOTONE_P", a.p, sa * a.Q_q, sb * b.Q_q, tol, true);
    r.diagnostic = "m^{-1/p} Q_q from p=" + describe_p(a.p) + " to p=" + describe_p(b.p);
    const bool ok = a.fine.qq_converged && a.coarse.qq_converged && b.fine.qq_converged && b.coarse.qq_converged;
    if (!ok) {
      r.verdict = Verdict::inconclusive;
      r.solver_failure = true;
      r.diagnostic += "; q-torsion did not converge";
    }
    run.results.push_back(std::move(r));
  }

  if (options.wq_limit) {
    auto wq = wq_limit_suite(spec, h, {2.0, 4.0, 8.0, 16.0}, options.cfg);
    run.results.insert(run.results.end(), wq.begin(), wq.end());
  }
  return run;
}

std::vector<double> wq_limit_deviations(const DomainSpec& spec, double h, const std::vector<double>& q_list,
                                        const SolverConfig& cfg) {
  auto mesh = std::make_shared<const Mesh>(generate_mesh(spec, h));
  const ScalarField winf = w_infinity_field(mesh);
  std::vector<double> dev;
  for (double q : q_list) {
    const QTorsionResult r = solve_q_torsion(mesh, q, cfg);
    if (!r.converged) throw std::runtime_error("q-torsion did not converge for q = " + describe_p(q));
    double m = 0.0;
    for (std::size_t v = 0; v < mesh->vertex_count(); ++v) m = std::max(m, std::abs(r.field[v] - winf[v]));
    dev.push_back(m);
  }
  return dev;
}

std::vector<VerificationResult> wq_limit_suite(const DomainSpec& spec, double h, const std::vector<double>& q_list,
                                               const SolverConfig& cfg) {
  std::vector<VerificationResult> out;
  std::vector<double> dev;
  try {
    dev = wq_limit_deviations(spec, h, q_list, cfg);
  } catch (const std::exception& e) {
    for (std::size_t k = 0; k + 1 < q_list.size(); ++k) out.push_back(failed("WQ_LIMIT", q_list[k + 1], e.what()));
    return out;
  }
  for (std::size_t k = 0; k + 1 < q_list.size(); ++k) {
    // p is reported as the dual exponent of the larger q
    auto r = check_strictly_less("WQ_LIMIT", dual_exponent(q_list[k + 1]), dev[k + 1], dev[k]);
    r.diagnostic = "max|w_q - w_inf| at q=" + describe_p(q_list[k + 1]) + " below q=" + describe_p(q_list[k]);
    out.push_back(std::move(r));
  }
  return out;
}

ConvergenceTable convergence_study(const DomainSpec& spec, double p, const std::vector<double>& h_list,
                                   const SolverConfig& cfg, bool include_lambda_Bp) {
  if (h_list.size() < 3) throw std::invalid_argument("convergence_study: at least three mesh sizes are required");
  for (std::size_t k = 0; k < h_list.size(); ++k) {
    if (!(h_list[k] > 0.0)) throw std::invalid_argument("convergence_study: mesh sizes must be positive");
    if (k && !(h_list[k] < h_list[k - 1])) throw std::invalid_argument("convergence_study: mesh sizes must decrease");
  }
  if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("convergence_study: p must be >= 1");
  cfg.validate();

  ConvergenceTable table;
  table.domain = spec.name();
  table.p = p;
  table.quantities = {"Q_q"};
  if (p > 1.0) table.quantities.push_back("Q_q_dual_route");
  for (const char* n : {"Q_q_pairing_route", "rho", "sqrt_rho", "lambda_B2"}) table.quantities.push_back(n);
  if (include_lambda_Bp) table.quantities.push_back("lambda_Bp");

  for (double h : h_list) {
    ConvergenceRow row;
    row.h = h;
    try {
      auto mesh = std::make_shared<const Mesh>(generate_mesh(spec, h));
      row.vertices = mesh->vertex_count();
      const QqRoutes qq = st_venant_Qq(mesh, p, cfg);
      row.values["Q_q"] = qq.primary;
      if (qq.dual_route) row.values["Q_q_dual_route"] = *qq.dual_route;
      row.values["Q_q_pairing_route"] = qq.pairing_route;
      const double rho = torsional_rigidity(mesh);
      row.values["rho"] = rho;
      row.values["sqrt_rho"] = std::sqrt(rho);
      row.values["lambda_B2"] = lambda_B2(mesh);
      if (!qq.converged) {
        row.ok = false;
        row.error = "q-torsion did not converge";
      }
      if (include_lambda_Bp) {
        const BpResult bp = lambda_Bp(mesh, p, cfg);
        row.values["lambda_Bp"] = bp.value;
        if (!bp.converged) {
          row.ok = false;
          row.error += row.error.empty() ? "lambda_Bp did not converge" : "; lambda_Bp did not converge";
        }
      }
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
      row.values.clear();
    }
    table.rows.push_back(std::move(row));
  }

  for (std::size_t k = 1; k < table.rows.size(); ++k)
    for (const auto& q : table.quantities) {
      const auto& cur = table.rows[k].values;
      const auto& prev = table.rows[k - 1].values;
      if (cur.count(q) && prev.count(q)) table.rows[k].differences[q] = cur.at(q) - prev.at(q);
    }
  for (std::size_t k = 2; k < table.rows.size(); ++k)
    for (const auto& q : table.quantities) {
      const auto& d1 = table.rows[k - 1].differences;
      const auto& d2 = table.rows[k].differences;
      if (!d1.count(q) || !d2.count(q)) continue;
      const double a = std::abs(d1.at(q)), b = std::abs(d2.at(q));
      if (a > 0.0 && b > 0.0)
        table.rows[k].orders[q] = std::log(a / b) / std::log(table.rows[k - 1].h / table.rows[k].h);
    }
  return table;
}

}  // namespace bergman
