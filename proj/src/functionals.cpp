#include <bergman/functionals.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <bergman/fem.hpp>
#include <bergman/oracles.hpp>

namespace bergman {

namespace {

constexpr int kDim = 2;

// The iteration stops once no per-triangle gradient moves by more than this fraction
// of sqrt(tol) times the largest gradient.
constexpr double kGradientStepFactor = 0.01;

constexpr int kRefinementSweeps = 2;

void require_planar(const Mesh& mesh, const char* who) {
  if (mesh.domain() && mesh.domain()->dimension() != 2)
    throw std::invalid_argument(std::string(who) + ": only planar meshes are supported");
}

double half_square_norm(const Point2& x) { return 0.5 * (x[0] * x[0] + x[1] * x[1]); }

double boundary_diameter(const Mesh& mesh) {
  std::vector<Point2> pts;
  for (std::size_t v = 0; v < mesh.vertex_count(); ++v)
    if (mesh.is_boundary(static_cast<int>(v))) pts.push_back(mesh.vertices()[v]);
  double d2 = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double dx = pts[i][0] - pts[j][0], dy = pts[i][1] - pts[j][1];
      d2 = std::max(d2, dx * dx + dy * dy);
    }
  return std::sqrt(d2);
}

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

// Constraint data shared by every step: the unweighted stiffness matrix,
// the load of Laplace(u) = N, and the interior/boundary split.
struct Constraints {
  std::size_t n = 0;
  std::vector<int> interior;
  std::vector<int> interior_index;  // vertex -> row among interior vertices, or -1
  SpMat stiffness;
  Vec load;  // -N int phi_i
};

// Symmetric 2x2 coefficient per triangle: [xx xy; xy yy].
struct Tensor {
  double xx = 1.0;
  double xy = 0.0;
  double yy = 1.0;
};

SpMat assemble(const Mesh& mesh, const std::vector<Tensor>& coeff) {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(9 * mesh.triangle_count());
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const auto& g = mesh.hat_gradients(t);
    const Tensor a = coeff.empty() ? Tensor{} : coeff[t];
    const double s = mesh.area(t);
    for (int i = 0; i < 3; ++i) {
      const double ax = a.xx * g[i][0] + a.xy * g[i][1], ay = a.xy * g[i][0] + a.yy * g[i][1];
      for (int j = 0; j < 3; ++j) trips.emplace_back(tri[i], tri[j], s * (ax * g[j][0] + ay * g[j][1]));
    }
  }
  SpMat K(static_cast<Eigen::Index>(mesh.vertex_count()), static_cast<Eigen::Index>(mesh.vertex_count()));
  K.setFromTriplets(trips.begin(), trips.end());
  return K;
}

Constraints make_constraints(const Mesh& mesh) {
  Constraints c;
  c.n = mesh.vertex_count();
  c.interior_index.assign(c.n, -1);
  for (std::size_t v = 0; v < c.n; ++v)
    if (!mesh.is_boundary(static_cast<int>(v))) {
      c.interior_index[v] = static_cast<int>(c.interior.size());
      c.interior.push_back(static_cast<int>(v));
    }
  c.stiffness = assemble(mesh, {});
  c.load = Vec::Zero(static_cast<Eigen::Index>(c.n));
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t)
    for (int v : mesh.triangles()[t]) c.load[v] -= kDim * mesh.area(t) / 3.0;
  return c;
}

// Keeps the boundary values of v and solves the interior rows exactly, giving
// the feasible field with that boundary trace.
std::vector<double> project_feasible(const Constraints& c, const std::vector<double>& v) {
  const auto m = static_cast<Eigen::Index>(c.interior.size());
  std::vector<Eigen::Triplet<double>> trips;
  Vec rhs(m);
  for (Eigen::Index r = 0; r < m; ++r) rhs[r] = c.load[c.interior[r]];
  for (Eigen::Index col = 0; col < c.stiffness.outerSize(); ++col)
    for (SpMat::InnerIterator it(c.stiffness, col); it; ++it) {
      const int row = c.interior_index[it.row()];
      if (row < 0) continue;
      const int ci = c.interior_index[col];
      if (ci >= 0)
        trips.emplace_back(row, ci, it.value());
      else
        rhs[row] -= it.value() * v[col];
    }
  SpMat kii(m, m);
  kii.setFromTriplets(trips.begin(), trips.end());
  Eigen::SimplicialLDLT<SpMat> ldlt(kii);
  if (ldlt.info() != Eigen::Success) throw LinearSolveError("lambda_Bp: interior stiffness factorization failed");
  const Vec ui = ldlt.solve(rhs);
  std::vector<double> u(v);
  for (Eigen::Index r = 0; r < m; ++r) u[c.interior[r]] = ui[r];
  return u;
}

std::vector<Point2> gradients(const ScalarField& u) {
  std::vector<Point2> g(u.mesh().triangle_count());
  for (std::size_t t = 0; t < g.size(); ++t) g[t] = u.gradient(t);
  return g;
}

double smoothed_objective(const Mesh& mesh, const std::vector<Point2>& g, double p, double eps) {
  double s = 0.0;
  for (std::size_t t = 0; t < g.size(); ++t)
    s += mesh.area(t) * std::pow(g[t][0] * g[t][0] + g[t][1] * g[t][1] + eps * eps, 0.5 * p);
  return s;
}

// J(g + theta d) - J(g) summed per triangle without cancellation, so that
// steps below the rounding level of J itself are still ranked correctly.
double objective_change(const Mesh& mesh, const std::vector<Point2>& g, const std::vector<Point2>& d, double theta,
                        double p, double eps) {
  double s = 0.0;
  for (std::size_t t = 0; t < g.size(); ++t) {
    const double dx = theta * d[t][0], dy = theta * d[t][1];
    const double s0 = g[t][0] * g[t][0] + g[t][1] * g[t][1] + eps * eps;
    const double ds = 2.0 * (g[t][0] * dx + g[t][1] * dy) + dx * dx + dy * dy;
    s += mesh.area(t) * std::pow(s0, 0.5 * p) * std::expm1(0.5 * p * std::log1p(ds / s0));
  }
  return s;
}

// Saddle-point system  [K_A  C^T; C  0] [u; mu] = [b; f]  over all vertices
// but one pinned vertex, with K_A the stiffness of the coefficient tensors A
// and C the interior rows of the unweighted stiffness.
class SaddleSystem {
 public:
  SaddleSystem(const Mesh& mesh, const Constraints& c, int pin) : mesh_(mesh), c_(c), pin_(pin) {
    free_index_.assign(c.n, -1);
    Eigen::Index k = 0;
    for (std::size_t v = 0; v < c.n; ++v)
      if (static_cast<int>(v) != pin) free_index_[v] = static_cast<int>(k++);
    nf_ = k;
    size_ = nf_ + static_cast<Eigen::Index>(c.interior.size());
  }

  std::vector<double> solve(const std::vector<Tensor>& coeff, const Vec& b, const Vec& f, double pin_value) {
    const SpMat kw = assemble(mesh_, coeff);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(kw.nonZeros()) * 3);
    Vec rhs = Vec::Zero(size_);
    for (std::size_t v = 0; v < c_.n; ++v)
      if (free_index_[v] >= 0) rhs[free_index_[v]] = b[static_cast<Eigen::Index>(v)];
    for (Eigen::Index col = 0; col < kw.outerSize(); ++col)
      for (SpMat::InnerIterator it(kw, col); it; ++it) {
        const int fr = free_index_[it.row()];
        if (fr < 0) continue;
        const int fc = free_index_[col];
        if (fc >= 0)
          trips.emplace_back(fr, fc, it.value());
        else
          rhs[fr] -= it.value() * pin_value;
      }
    for (Eigen::Index r = 0; r < size_ - nf_; ++r) rhs[nf_ + r] = f[c_.interior[r]];
    for (Eigen::Index col = 0; col < c_.stiffness.outerSize(); ++col)
      for (SpMat::InnerIterator it(c_.stiffness, col); it; ++it) {
        const int row = c_.interior_index[it.row()];
        if (row < 0) continue;
        const int fc = free_index_[col];
        if (fc >= 0) {
          trips.emplace_back(nf_ + row, fc, it.value());
          trips.emplace_back(fc, nf_ + row, it.value());
        } else {
          rhs[nf_ + row] -= it.value() * pin_value;
        }
      }
    SpMat a(size_, size_);
    a.setFromTriplets(trips.begin(), trips.end());
    a.makeCompressed();
    if (!analyzed_) {
      lu_.analyzePattern(a);
      analyzed_ = true;
    }
    lu_.factorize(a);
    if (lu_.info() != Eigen::Success)
      throw LinearSolveError("lambda_Bp: saddle-point factorization failed: " + lu_.lastErrorMessage());
    Vec x = lu_.solve(rhs);
    if (lu_.info() != Eigen::Success) throw LinearSolveError("lambda_Bp: saddle-point solve failed");
    // iterative refinement against the assembled matrix
    for (int sweep = 0; sweep < kRefinementSweeps; ++sweep) {
      const Vec r = rhs - a * x;
      x += lu_.solve(r);
    }
    std::vector<double> u(c_.n);
    for (std::size_t v = 0; v < c_.n; ++v) u[v] = free_index_[v] >= 0 ? x[free_index_[v]] : pin_value;
    return u;
  }

 private:
  const Mesh& mesh_;
  const Constraints& c_;
  int pin_;
  std::vector<int> free_index_;
  Eigen::Index nf_ = 0;
  Eigen::Index size_ = 0;
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu_;
  bool analyzed_ = false;
};

}  // namespace

QqRoutes st_venant_Qq(const std::shared_ptr<const Mesh>& mesh, double p, const SolverConfig& cfg) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("st_venant_Qq: p must be >= 1");
  require_planar(*mesh, "st_venant_Qq");

  if (p == 1.0) {
    ScalarField w = w_infinity_field(mesh);
    const double primary = kDim * integrate_field(*mesh, Integrand::field, w);
    const auto curves = boundary_curves(*mesh->domain());
    const QuadratureRule rule = quadrature_rule(4);
    double pairing = 0.0;
    for (std::size_t t = 0; t < mesh->triangle_count(); ++t) {
      const auto& tri = mesh->triangles()[t];
      for (std::size_t k = 0; k < rule.points.size(); ++k) {
        Point2 x{0.0, 0.0};
        for (int i = 0; i < 3; ++i) {
          x[0] += rule.points[k][i] * mesh->vertices()[tri[i]][0];
          x[1] += rule.points[k][i] * mesh->vertices()[tri[i]][1];
        }
        const Point2 g = boundary_distance_gradient(curves, x);
        pairing -= mesh->area(t) * rule.weights[k] * (x[0] * g[0] + x[1] * g[1]);
      }
    }
    return QqRoutes{primary, std::nullopt, pairing, std::move(w), true, 0, {}};
  }

  const double q = dual_exponent(p);
  QTorsionResult r = solve_q_torsion(mesh, q, cfg);
  const double integral = integrate_field(*mesh, Integrand::field, r.field);
  const double grad_q = grad_p_norm(r.field, q);
  const double primary = kDim * std::pow(integral, 1.0 / p);
  const double dual = kDim * std::pow(grad_q, q - 1.0);
  const double pairing = -integrate_field(*mesh, Integrand::x_dot_grad, r.field) / grad_q;
  return QqRoutes{primary, dual, pairing, std::move(r.field), r.converged, r.iterations, std::move(r.log)};
}

double torsional_rigidity(const std::shared_ptr<const Mesh>& mesh) {
  require_planar(*mesh, "torsional_rigidity");
  const FloatingSolution v = floating_boundary_solve(mesh, kDim);
  return integrate_field(*mesh, Integrand::grad_norm_pow, v.field, 2.0);
}

double lambda_B2(const std::shared_ptr<const Mesh>& mesh) {
  require_planar(*mesh, "lambda_B2");
  DirichletData trace;
  for (int c = 0; c < mesh->component_count(); ++c) trace[c] = half_square_norm;
  ScalarField u = solve_weighted_poisson(mesh, {}, 0.0, trace);
  const ScalarField quad = interpolate(mesh, half_square_norm);
  for (std::size_t v = 0; v < mesh->vertex_count(); ++v) u.values()[v] -= quad[v];
  return std::sqrt(kDim * integrate_field(*mesh, Integrand::field, u));
}

BpResult lambda_Bp(const std::shared_ptr<const Mesh>& mesh, double p, const SolverConfig& cfg, BpStart start) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("lambda_Bp: p must be >= 1");
  cfg.validate();
  require_planar(*mesh, "lambda_Bp");
  const Mesh& m = *mesh;
  const double eps = p == 1.0 ? 1e-5 * boundary_diameter(m) : cfg.epsilon;

  const Constraints c = make_constraints(m);
  std::vector<double> seed_field(c.n, 0.0);
  if (start == BpStart::quadratic_trace)
    for (std::size_t v = 0; v < c.n; ++v) seed_field[v] = half_square_norm(m.vertices()[v]);
  ScalarField u(mesh, project_feasible(c, seed_field));

  const int pin = m.boundary_edges().front().v[0];
  SaddleSystem system(m, c, pin);
  const std::size_t nt = m.triangle_count();
  const bool newton = p > 2.0;

  std::vector<Point2> gu = gradients(u);
  double objective = smoothed_objective(m, gu, p, eps);
  BpResult result{0.0, 0.0, objective, eps, false, 0, {}, u};
  result.log.push_back({0, objective, 0.0, 0.0});

  for (int k = 1; k <= cfg.max_iter; ++k) {
    std::vector<Tensor> coeff(nt);
    std::vector<double> d;
    if (newton) {
      // Newton step on J / p: Hessian tensors and minus the gradient
      Vec b = Vec::Zero(static_cast<Eigen::Index>(c.n));
      for (std::size_t t = 0; t < nt; ++t) {
        const double s = gu[t][0] * gu[t][0] + gu[t][1] * gu[t][1] + eps * eps;
        const double w = std::pow(s, 0.5 * (p - 2.0));
        const double r = (p - 2.0) / s;
        coeff[t] = {w * (1.0 + r * gu[t][0] * gu[t][0]), w * r * gu[t][0] * gu[t][1],
                    w * (1.0 + r * gu[t][1] * gu[t][1])};
        const auto& tri = m.triangles()[t];
        const auto& g = m.hat_gradients(t);
        for (int i = 0; i < 3; ++i) b[tri[i]] -= m.area(t) * w * (gu[t][0] * g[i][0] + gu[t][1] * g[i][1]);
      }
      d = system.solve(coeff, b, Vec::Zero(static_cast<Eigen::Index>(c.n)), 0.0);
    } else {
      for (std::size_t t = 0; t < nt; ++t) {
        const double w = std::pow(gu[t][0] * gu[t][0] + gu[t][1] * gu[t][1] + eps * eps, 0.5 * (p - 2.0));
        coeff[t] = {w, 0.0, w};
      }
      d = system.solve(coeff, Vec::Zero(static_cast<Eigen::Index>(c.n)), c.load, u[pin]);
      for (std::size_t i = 0; i < c.n; ++i) d[i] -= u[i];
    }
    const std::vector<Point2> gd = gradients(ScalarField(mesh, d));

    // convex phi(theta) = J(u + theta d); minimize on [0, damping]
    auto slope = [&](double theta) {
      double s = 0.0;
      for (std::size_t t = 0; t < nt; ++t) {
        const double gx = gu[t][0] + theta * gd[t][0], gy = gu[t][1] + theta * gd[t][1];
        s += m.area(t) * std::pow(gx * gx + gy * gy + eps * eps, 0.5 * (p - 2.0)) * (gx * gd[t][0] + gy * gd[t][1]);
      }
      return s;
    };
    double theta = cfg.damping;
    if (slope(theta) > 0.0) {
      double lo = 0.0, hi = cfg.damping;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (slope(mid) > 0.0 ? hi : lo) = mid;
      }
      theta = lo > 0.0 ? lo : 0.5 * hi;
    }

    std::vector<double> next(u.values());
    for (std::size_t i = 0; i < c.n; ++i) next[i] += theta * d[i];
    ScalarField candidate(mesh, std::move(next));
    std::vector<Point2> gc = gradients(candidate);
    double step = 0.0, size = 0.0;
    for (std::size_t t = 0; t < nt; ++t) {
      step = std::max(step, theta * std::hypot(gd[t][0], gd[t][1]));
      size = std::max(size, std::hypot(gc[t][0], gc[t][1]));
    }
    const double change = objective_change(m, gu, gd, theta, p, eps);
    if (!std::isfinite(change)) throw std::runtime_error("lambda_Bp: non-finite objective");
    result.iterations = k;
    if (change > 0.0 || theta == 0.0) {
      // no descent left: stationary up to the accuracy of the linear solve
      result.converged = step <= std::sqrt(cfg.tol) * size;
      break;
    }
    const double value = objective + change;
    const double decrease = -change / std::max(value, std::numeric_limits<double>::min());
    u = std::move(candidate);
    gu = std::move(gc);
    objective = value;
    result.log.push_back({k, value, theta, step / std::max(size, std::numeric_limits<double>::min())});
    if (decrease < cfg.tol && step <= kGradientStepFactor * std::sqrt(cfg.tol) * size) {
      result.converged = true;
      break;
    }
  }

  double pnorm = 0.0, moment = 0.0, f0_norm = 0.0;
  for (std::size_t t = 0; t < nt; ++t) {
    const double a = m.area(t);
    const double len = std::hypot(gu[t][0], gu[t][1]);
    pnorm += a * std::pow(len, p);
    if (len == 0.0) continue;
    const double scale = std::pow(len, p - 2.0);
    const Point2 x = m.centroid(t);
    moment += a * scale * (gu[t][0] * x[0] + gu[t][1] * x[1]);
    if (p == 1.0) f0_norm = 1.0;
  }
  if (p > 1.0) f0_norm = std::pow(pnorm, 1.0 - 1.0 / p);
  result.value = std::pow(pnorm, 1.0 / p);
  result.cross_check = f0_norm > 0.0 ? moment / f0_norm : 0.0;
  result.objective = smoothed_objective(m, gu, p, eps);
  result.field = std::move(u);
  return result;
}

ApBracket lambda_Ap_bracket(const std::shared_ptr<const Mesh>& mesh, double p, const SolverConfig& cfg) {
  return ApBracket{st_venant_Qq(mesh, p, cfg).primary, lambda_Bp(mesh, p, cfg).value};
}

double richardson_error(double fine, double coarse) {
  return std::abs(fine - coarse) / (std::pow(2.0, 1.5) - 1.0);
}

double ConstantsReport::error_of(const std::string& name) const {
  const auto it = errors.find(name);
  if (it == errors.end()) throw std::out_of_range("no error estimate for '" + name + "'");
  return it->second;
}

namespace {

struct LevelValues {
  QqRoutes qq;
  double rho = 0.0;
  double lambda_b2 = 0.0;
  BpResult bp;
  SolveDiagnostics diag;
};

LevelValues evaluate_level(const DomainSpec& spec, double p, double h, const SolverConfig& cfg,
                           std::uint64_t seed) {
  auto mesh = std::make_shared<const Mesh>(generate_mesh(spec, h));
  QqRoutes qq = st_venant_Qq(mesh, p, cfg);
  const double rho = torsional_rigidity(mesh);
  const double lb2 = lambda_B2(mesh);
  BpResult bp = lambda_Bp(mesh, p, cfg);
  SolveDiagnostics diag;
  diag.h = h;
  diag.vertices = mesh->vertex_count();
  diag.triangles = mesh->triangle_count();
  diag.qq_iterations = qq.iterations;
  diag.qq_converged = qq.converged;
  diag.qq_weak_residual = p > 1.0 ? weak_residual(qq.field, dual_exponent(p), 50, seed) : 0.0;
  diag.bp_iterations = bp.iterations;
  diag.bp_converged = bp.converged;
  diag.bp_cross_check = bp.cross_check;
  diag.qq_log = qq.log;
  diag.bp_log = bp.log;
  return LevelValues{std::move(qq), rho, lb2, std::move(bp), diag};
}

}  // namespace

ConstantsReport compute_constants(const DomainSpec& spec, double p, double h, const SolverConfig& cfg,
                                  std::uint64_t seed) {
  if (spec.dimension() != 2) throw std::invalid_argument("compute_constants: only planar domains are supported");
  if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("compute_constants: p must be >= 1");
  cfg.validate();
  const LevelValues fine = evaluate_level(spec, p, h, cfg, seed);
  const LevelValues coarse = evaluate_level(spec, p, 2.0 * h, cfg, seed);

  ConstantsReport r;
  r.domain = spec.name();
  r.p = p;
  r.q = dual_exponent(p);
  r.Q_q = fine.qq.primary;
  r.Q_q_dual_route = fine.qq.dual_route;
  r.Q_q_pairing_route = fine.qq.pairing_route;
  r.rho = fine.rho;
  r.sqrt_rho = std::sqrt(fine.rho);
  r.lambda_B2 = fine.lambda_b2;
  r.lambda_Bp = fine.bp.value;
  r.lambda_Ap_bracket = {fine.qq.primary, fine.bp.value};
  r.r_omega = equivalent_ball_radius(spec.volume(), 2);
  r.Q_q_ball_r_omega = qq_ball(2, p, r.r_omega);
  r.mesh_h = h;
  r.errors["Q_q"] = richardson_error(fine.qq.primary, coarse.qq.primary);
  if (fine.qq.dual_route && coarse.qq.dual_route)
    r.errors["Q_q_dual_route"] = richardson_error(*fine.qq.dual_route, *coarse.qq.dual_route);
  r.errors["Q_q_pairing_route"] = richardson_error(fine.qq.pairing_route, coarse.qq.pairing_route);
  r.errors["rho"] = richardson_error(fine.rho, coarse.rho);
  r.errors["sqrt_rho"] = richardson_error(std::sqrt(fine.rho), std::sqrt(coarse.rho));
  r.errors["lambda_B2"] = richardson_error(fine.lambda_b2, coarse.lambda_b2);
  r.errors["lambda_Bp"] = richardson_error(fine.bp.value, coarse.bp.value);
  r.estimated_error = r.errors["Q_q"];
  r.fine = fine.diag;
  r.coarse = coarse.diag;
  r.seed = seed;
  return r;
}

}  // namespace bergman
