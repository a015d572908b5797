#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include <bergman/fem.hpp>
#include <bergman/mesh.hpp>

namespace bergman {

struct SolverConfig {
  double epsilon = 1e-6;  // gradient regularization
  double tol = 1e-13;     // relative objective decrease at which iteration stops
  int max_iter = 500;
  double damping = 1.0;   // largest step accepted along each Picard direction
  double cg_tol = 1e-10;  // relative residual of the inner linear solves

  /// Throws std::invalid_argument on out-of-range settings.
  void validate() const;
};

struct IterationRecord {
  int iteration = 0;
  double objective = 0.0;
  double damping = 0.0;   // step length actually taken
  double residual = 0.0;  // max relative hat-function residual over interior vertices
};

struct QTorsionResult {
  ScalarField field;
  bool converged = false;
  int iterations = 0;
  double objective = 0.0;
  std::vector<IterationRecord> log;
};

/// Discrete q-torsion energy (1/q) sum_T area (|grad u|^2 + eps^2)^{q/2} - int u.
double q_energy(const ScalarField& u, double q, double epsilon);

/// Minimizes the discrete q-torsion energy over fields vanishing on the
/// boundary by damped Picard (IRLS) iteration with an exact line search along
/// each Picard direction, so the energy never increases. The default initial
/// guess is the q = 2 solution, or for q > 8 the solution at q / 2.
/// Supports 1 < q <= 32.
QTorsionResult solve_q_torsion(const std::shared_ptr<const Mesh>& mesh, double q, const SolverConfig& cfg = {},
                               const std::optional<ScalarField>& initial = std::nullopt);

/// The q = infinity torsion function: distance to the boundary.
ScalarField w_infinity_field(const std::shared_ptr<const Mesh>& mesh);

/// Max over sample_count random interior hat functions phi of
/// |int |grad w|^{q-2} grad w . grad phi - int phi| / int phi.
double weak_residual(const ScalarField& w, double q, int sample_count, std::uint64_t seed);

}  // namespace bergman
