#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bergman {

/// Volume of the unit ball in R^N, by the half-integer Gamma recursion
/// V_N = (2*pi/N) * V_{N-2}, V_0 = 1, V_1 = 2.
double unit_ball_volume(int N);

/// Surface area of the unit sphere in R^N (= N * unit_ball_volume(N)).
double unit_sphere_area(int N);

/// Hoelder conjugate: 1/p + 1/q = 1, with 1 <-> infinity.
double dual_exponent(double p);

/// Closed-form St Venant q-functional of the ball B(r), q dual to p.
double qq_ball(int N, double p, double r);

/// Q_infinity of the annulus B(R) minus closed B(r): the p = 1 St Venant value.
double qinf_annulus(int N, double r, double R);

/// Radius of the ball with the given volume.
double equivalent_ball_radius(double volume, int N);

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Radial function sampled on an increasing grid of radii.
struct RadialProfile {
  int dimension = 2;
  double q_exponent = 2.0;  // infinity for the distance profile
  std::vector<double> radii;
  std::vector<double> values;
  std::vector<double> derivatives;

  /// Cubic Hermite interpolation between grid points; clamps outside the grid.
  double value_at(double rho) const;
};

enum class RadialProblem { q_torsion, rigidity_with_flux };

/// Exact radial solutions on a ball (r_inner == 0) or an annulus.
///
/// q_torsion solves (t^{N-1} |w'|^{q-2} w')' = -t^{N-1} with zero boundary
/// values. The flux t^{N-1}|w'|^{q-2}w' is known in closed form up to the
/// radius where w' vanishes, which is located by bisection; values are
/// obtained by adaptive Gauss-Kronrod quadrature of w'.
///
/// rigidity_with_flux solves -Laplace(v) = N with v(r_outer) = 0, v constant
/// on the inner sphere, and outward flux through the inner sphere equal to
/// 2 * m(B(r_inner)).
class RadialSolution {
 public:
  RadialSolution(int N, double q, double r_inner, double r_outer, RadialProblem problem,
                 double quadrature_tol = 1e-12);

  int dimension() const { return N_; }
  double q() const { return q_; }
  double r_inner() const { return r_in_; }
  double r_outer() const { return r_out_; }
  RadialProblem problem() const { return problem_; }

  double derivative(double rho) const;
  double value(double rho) const;

  /// Radius where w' changes sign (annular q-torsion); 0 for a ball.
  double free_radius() const { return rho_star_; }

  /// Value on the inner boundary sphere (the floating constant c_1).
  double inner_value() const { return value(r_in_); }

  /// Integral of the solution over the domain.
  double volume_integral() const;

  /// Integral over the domain of |w'|^s.
  double gradient_power_integral(double s) const;

  RadialProfile sample(std::span<const double> radii) const;

 private:
  double integrate(const std::function<double(double)>& f, double a, double b) const;
  double integrate_piece(const std::function<double(double)>& f, double a, double b) const;
  bool is_cusp(double t) const;
  double integrate_split(const std::function<double(double)>& f, double a, double b) const;

  int N_;
  double q_;
  double r_in_;
  double r_out_;
  RadialProblem problem_;
  double tol_;
  double rho_star_ = 0.0;
  double flux_constant_ = 0.0;
};

/// Closed-form q-torsion profile of B(r): w(t) = N^{1-p} (r^p - t^p) / p.
/// Default grid: 1001 uniform radii on [0, r].
RadialProfile wq_ball_profile(int N, double q, double r, std::span<const double> radii = {});

/// Radial solve sampled on `radii` (default: 1001 uniform radii).
RadialProfile radial_solve(int N, double q, double r_inner, double r_outer, RadialProblem problem,
                           std::span<const double> radii = {});

}  // namespace bergman
