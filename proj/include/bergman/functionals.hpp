#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <bergman/domain.hpp>
#include <bergman/mesh.hpp>
#include <bergman/q_torsion.hpp>

namespace bergman {

/// Q_q evaluated three ways from one torsion field.
struct QqRoutes {
  double primary = 0.0;               // N (int w_q)^{1/p}
  std::optional<double> dual_route;   // N |grad w_q|_q^{q-1}; absent for p = 1
  double pairing_route = 0.0;         // -(int x . grad w_q) / |grad w_q|_q
  ScalarField field;                  // w_q (the distance field when p = 1)
  bool converged = true;
  int iterations = 0;
  std::vector<IterationRecord> log;
};

/// St Venant functional for p >= 1 with q the dual exponent. For p = 1 the
/// pairing route uses the exact gradient of the distance function (unit
/// length almost everywhere) so that it does not share the interpolant.
QqRoutes st_venant_Qq(const std::shared_ptr<const Mesh>& mesh, double p, const SolverConfig& cfg = {});

/// int |grad v|^2 with v the floating-boundary solution of -Laplace(v) = N.
double torsional_rigidity(const std::shared_ptr<const Mesh>& mesh);

/// sqrt(N int u) with u = H - I(|x|^2/2), H the discrete harmonic extension
/// of |x|^2/2 and I the nodal interpolant.
double lambda_B2(const std::shared_ptr<const Mesh>& mesh);

/// Feasible starting points for the constrained minimization.
enum class BpStart {
  dirichlet_zero,   // the zero-boundary solution of Laplace(u) = N
  quadratic_trace,  // the solution of Laplace(u) = N with boundary values |x|^2/2
};

struct BpResult {
  double value = 0.0;        // |grad u|_p at the final iterate
  double cross_check = 0.0;  // (int f0 . x) / |f0|_q with f0 = |grad u|^{p-2} grad u
  double objective = 0.0;    // smoothed objective sum area (|grad u|^2 + eps^2)^{p/2}
  double epsilon = 0.0;      // smoothing actually used
  bool converged = false;
  int iterations = 0;
  std::vector<IterationRecord> log;  // objective of every accepted iterate
  ScalarField field;
};

/// Minimizes |grad u|_p over discrete u with Laplace(u) = N in the weak sense
/// at interior vertices, i.e. u = u* + E(b) over boundary values b. For
/// p <= 2 each step is an IRLS step (scalar weights (|grad u|^2 + eps^2)^{(p-2)/2});
/// for p > 2 it is a Newton step with the full per-triangle Hessian tensor.
/// Either way the step solves a saddle-point system with a sparse LU
/// factorization and moves along the resulting direction with an exact line
/// search, so the smoothed objective never increases. p = 1 uses
/// eps = 1e-5 * diameter.
BpResult lambda_Bp(const std::shared_ptr<const Mesh>& mesh, double p, const SolverConfig& cfg = {},
                   BpStart start = BpStart::dirichlet_zero);

struct ApBracket {
  double lower = 0.0;  // Q_q
  double upper = 0.0;  // lambda_Bp
};

ApBracket lambda_Ap_bracket(const std::shared_ptr<const Mesh>& mesh, double p, const SolverConfig& cfg = {});

/// Richardson guard |v(h) - v(2h)| / (2^1.5 - 1).
double richardson_error(double fine, double coarse);

/// Per-resolution solver diagnostics.
struct SolveDiagnostics {
  double h = 0.0;
  std::size_t vertices = 0;
  std::size_t triangles = 0;
  int qq_iterations = 0;
  bool qq_converged = true;
  double qq_weak_residual = 0.0;  // 0 for p = 1 and p = 2 is exact up to CG
  int bp_iterations = 0;
  bool bp_converged = true;
  double bp_cross_check = 0.0;
  std::vector<IterationRecord> qq_log;
  std::vector<IterationRecord> bp_log;
};

struct ConstantsReport {
  std::string domain;
  double p = 2.0;
  double q = 2.0;
  double Q_q = 0.0;
  std::optional<double> Q_q_dual_route;
  double Q_q_pairing_route = 0.0;
  double rho = 0.0;
  double sqrt_rho = 0.0;
  double lambda_B2 = 0.0;
  double lambda_Bp = 0.0;
  std::pair<double, double> lambda_Ap_bracket{0.0, 0.0};
  double r_omega = 0.0;
  double Q_q_ball_r_omega = 0.0;
  double mesh_h = 0.0;
  double estimated_error = 0.0;  // Richardson guard of Q_q

  /// Richardson guards of every computed constant, keyed by field name.
  std::map<std::string, double> errors;
  SolveDiagnostics fine;
  SolveDiagnostics coarse;
  std::uint64_t seed = 0;

  bool converged() const {
    return fine.qq_converged && fine.bp_converged && coarse.qq_converged && coarse.bp_converged;
  }
  double error_of(const std::string& name) const;
};

/// Evaluates every constant at mesh sizes h and 2h. The seed drives the
/// sampled weak residual of the q-torsion field.
ConstantsReport compute_constants(const DomainSpec& spec, double p, double h, const SolverConfig& cfg = {},
                                  std::uint64_t seed = 0);

}  // namespace bergman
