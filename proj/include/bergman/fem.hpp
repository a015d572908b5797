#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <bergman/mesh.hpp>
#include <bergman/sparse.hpp>

namespace bergman {

/// Boundary values per component id.
using DirichletData = std::map<int, std::function<double(const Point2&)>>;

/// P1 system  sum_T w_T int_T grad u . grad phi  =  rhs_density int phi
/// assembled over all vertices, plus constraint bookkeeping: fixed nodal
/// values, boundary components tied to one unknown constant, and optional
/// flux targets for the tied rows.
class SparseSystem {
 public:
  struct Solution {
    std::vector<double> values;
    std::vector<double> tied_constants;  // in tie() order
    CgResult cg;
  };

  /// Empty weights mean w = 1.
  SparseSystem(const Mesh& mesh, std::span<const double> weights, double rhs_density);

  const CsrMatrix& stiffness() const { return stiffness_; }
  const std::vector<double>& load() const { return load_; }

  void fix(int vertex, double value);
  void fix_component(int component, const std::function<double(const Point2&)>& g);

  /// Ties every vertex of a boundary component to one unknown. The tied row
  /// enforces  sum over the component of (K u - F) = flux_target, i.e. the
  /// outward normal flux through that boundary (0 when absent).
  void tie(int component, double flux_target = 0.0);

  Solution solve(const CgOptions& options = {}, std::span<const double> initial = {}) const;

 private:
  const Mesh& mesh_;
  CsrMatrix stiffness_;
  std::vector<double> load_;
  std::vector<double> fixed_;  // NaN for free vertices
  std::vector<int> group_;     // tied group index or -1
  std::vector<double> flux_targets_;
};

/// Solves the weighted Poisson problem with Dirichlet data on every boundary
/// component. Throws LinearSolveError when CG does not converge.
ScalarField solve_weighted_poisson(const std::shared_ptr<const Mesh>& mesh, std::span<const double> weight,
                                   double rhs_density, const DirichletData& dirichlet,
                                   const CgOptions& options = {});

struct FloatingSolution {
  ScalarField field;
  std::vector<double> constants;  // c_i for holes 1..j
  std::vector<double> fluxes;     // achieved outward fluxes through holes 1..j
  CgResult cg;
};

/// -Laplace(v) = rhs_density, v = 0 on the outer boundary, v constant on each
/// hole boundary with outward flux 2 m(G_i) (or the given targets).
FloatingSolution floating_boundary_solve(const std::shared_ptr<const Mesh>& mesh, double rhs_density,
                                         std::optional<std::vector<double>> flux_targets = std::nullopt,
                                         const CgOptions& options = {});

/// Discrete outward fluxes sum_{n in Gamma_c} (K u - F)_n for every boundary
/// component c (index 0 is the outer boundary).
std::vector<double> boundary_fluxes(const ScalarField& u, double rhs_density,
                                    std::span<const double> weights = {});

/// (sum_T area |grad u|^p)^{1/p}, or the maximum over triangles for p = inf.
double grad_p_norm(const ScalarField& u, double p);

/// |a(u, phi) - F(phi)| for the hat function of each listed vertex.
std::vector<double> hat_residuals(const ScalarField& u, std::span<const double> weights, double rhs_density,
                                  std::span<const int> vertices);

}  // namespace bergman
