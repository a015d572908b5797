#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <bergman/domain.hpp>
#include <bergman/functionals.hpp>
#include <bergman/q_torsion.hpp>

namespace bergman {

enum class Verdict { holds, holds_with_equality, violated, inconclusive };

const char* to_string(Verdict v);

/// One checked relation lhs (<=, <, =) rhs.
struct VerificationResult {
  std::string id;  // LAP, LAP1, LBineq, L2eq, TOR_EQUALITY, FABER_KRAHN, BALL_EQUALITY, MONOTONE_P, WQ_LIMIT
  double p = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // rhs - lhs for ordered relations, |lhs - rhs| for equalities
  double tolerance = 0.0;
  Verdict verdict = Verdict::inconclusive;
  std::string diagnostic;
  bool solver_failure = false;
};

/// Verdict for lhs <= rhs. |margin| <= tol is equality when equality is
/// admissible for the relation, otherwise inconclusive.
VerificationResult check_ordered(std::string id, double p, double lhs, double rhs, double tol,
                                 bool equality_admissible);

/// Verdict for lhs == rhs: holds_with_equality within tol, violated beyond.
VerificationResult check_equal(std::string id, double p, double lhs, double rhs, double tol);

/// lhs < rhs with no tolerance.
VerificationResult check_strictly_less(std::string id, double p, double lhs, double rhs);

struct HarnessOptions {
  SolverConfig cfg;
  std::uint64_t seed = 0;
  double tolerance_factor = 3.0;        // multiplies the summed Richardson guards
  std::optional<double> tolerance;      // absolute override for every result
  double monotone_factor = 2.0;         // per-point factor for MONOTONE_P
  bool wq_limit = false;                // also run the WQ_LIMIT suite
};

struct VerificationRun {
  std::vector<ConstantsReport> reports;
  std::vector<VerificationResult> results;

  bool any_violated() const;
  bool any_solver_failure() const;
};

/// Computes the constants for every p and checks the inequalities that apply.
/// Solver failures become inconclusive results with a diagnostic.
VerificationRun verify_inequalities(const DomainSpec& spec, const std::vector<double>& p_list, double h,
                                    const HarnessOptions& options = {});

/// max over vertices of |w_q - w_inf| on a mesh of spec, for every q.
std::vector<double> wq_limit_deviations(const DomainSpec& spec, double h, const std::vector<double>& q_list,
                                        const SolverConfig& cfg = {});

/// Strict decrease of max|w_q - w_inf| along q_list.
std::vector<VerificationResult> wq_limit_suite(const DomainSpec& spec, double h,
                                               const std::vector<double>& q_list = {2.0, 4.0, 8.0, 16.0},
                                               const SolverConfig& cfg = {});

struct ConvergenceRow {
  double h = 0.0;
  bool ok = true;
  std::string error;
  std::size_t vertices = 0;
  std::map<std::string, double> values;
  std::map<std::string, double> differences;  // value(h_k) - value(h_{k-1})
  std::map<std::string, double> orders;       // observed order from consecutive differences
};

struct ConvergenceTable {
  std::string domain;
  double p = 2.0;
  std::vector<std::string> quantities;
  std::vector<ConvergenceRow> rows;
};

/// Constants on each mesh size of a decreasing list (at least three sizes),
/// with successive differences and observed orders
/// log(|D_{k-1}| / |D_k|) / log(h_{k-1} / h_k), which is log2 for halving.
ConvergenceTable convergence_study(const DomainSpec& spec, double p, const std::vector<double>& h_list,
                                   const SolverConfig& cfg = {}, bool include_lambda_Bp = false);

}  // namespace bergman
