#include <bergman/q_torsion.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace bergman {

void SolverConfig::validate() const {
  if (!(epsilon > 0.0 && epsilon <= 1e-3)) throw std::invalid_argument("epsilon must lie in (0, 1e-3]");
  if (!(tol >= 100.0 * std::numeric_limits<double>::epsilon()) || !std::isfinite(tol))
    throw std::invalid_argument("tol must be at least 100 machine epsilons");
  if (max_iter < 1) throw std::invalid_argument("max_iter must be positive");
  if (!(damping > 0.0 && damping <= 1.0)) throw std::invalid_argument("damping must lie in (0, 1]");
  if (!(cg_tol > 0.0 && cg_tol < 1.0)) throw std::invalid_argument("cg_tol must lie in (0, 1)");
}

namespace {

constexpr double kContinuationQ = 8.0;

std::vector<Point2> gradients(const ScalarField& u) {
  std::vector<Point2> g(u.mesh().triangle_count());
  for (std::size_t t = 0; t < g.size(); ++t) g[t] = u.gradient(t);
  return g;
}

double load_dot(const Mesh& mesh, const std::vector<double>& v) {
  double s = 0.0;
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles()[t];
    s += mesh.area(t) * (v[tri[0]] + v[tri[1]] + v[tri[2]]) / 3.0;
  }
  return s;
}

std::vector<double> picard_weights(const std::vector<Point2>& g, double q, double eps) {
  std::vector<double> w(g.size());
  for (std::size_t t = 0; t < g.size(); ++t)
    w[t] = std::pow(g[t][0] * g[t][0] + g[t][1] * g[t][1] + eps * eps, 0.5 * (q - 2.0));
  return w;
}

// max over interior vertices of |a_w(u, phi) - int phi| / int phi
double interior_residual(const ScalarField& u, const std::vector<double>& w) {
  const Mesh& mesh = u.mesh();
  std::vector<int> interior;
  std::vector<double> mass(mesh.vertex_count(), 0.0);
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t)
    for (int v : mesh.triangles()[t]) mass[v] += mesh.area(t) / 3.0;
  for (std::size_t v = 0; v < mesh.vertex_count(); ++v)
    if (!mesh.is_boundary(static_cast<int>(v))) interior.push_back(static_cast<int>(v));
  const auto r = hat_residuals(u, w, 1.0, interior);
  double m = 0.0;
  for (std::size_t i = 0; i < interior.size(); ++i) m = std::max(m, r[i] / mass[interior[i]]);
  return m;
}

}  // namespace

double q_energy(const ScalarField& u, double q, double epsilon) {
  const Mesh& mesh = u.mesh();
  double s = 0.0;
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    const Point2 g = u.gradient(t);
    s += mesh.area(t) * std::pow(g[0] * g[0] + g[1] * g[1] + epsilon * epsilon, 0.5 * q);
  }
  return s / q - load_dot(mesh, u.values());
}

QTorsionResult solve_q_torsion(const std::shared_ptr<const Mesh>& mesh, double q, const SolverConfig& cfg,
                               const std::optional<ScalarField>& initial) {
  cfg.validate();
  if (!(q > 1.0) || !std::isfinite(q)) throw std::invalid_argument("solve_q_torsion: q must lie in (1, inf)");
  if (q > 32.0) throw std::invalid_argument("solve_q_torsion: q > 32 is not supported; use w_infinity_field");

  const double eps = cfg.epsilon;
  const CgOptions cg{cfg.cg_tol, 0};
  DirichletData zero;
  for (int c = 0; c < mesh->component_count(); ++c) zero[c] = [](const Point2&) { return 0.0; };

  // For large q the q = 2 solution has gradients too small near the ridges for
  // the weights |grad u|^{q-2}; continuation in q keeps the weights in range.
  ScalarField u = initial                ? *initial
                  : q > kContinuationQ ? solve_q_torsion(mesh, 0.5 * q, cfg).field
                                         : solve_weighted_poisson(mesh, {}, 1.0, zero, cg);
  if (&u.mesh() != mesh.get()) throw std::invalid_argument("initial guess lives on another mesh");
  for (std::size_t v = 0; v < mesh->vertex_count(); ++v)
    if (mesh->is_boundary(static_cast<int>(v))) u.values()[v] = 0.0;

  const Mesh& m = *mesh;
  const std::size_t nt = m.triangle_count();
  std::vector<double> area(nt);
  for (std::size_t t = 0; t < nt; ++t) area[t] = m.area(t);

  QTorsionResult result{u, false, 0, q_energy(u, q, eps), {}};
  std::vector<Point2> gu = gradients(u);
  result.log.push_back({0, result.objective, 0.0, interior_residual(u, picard_weights(gu, q, eps))});
  if (!std::isfinite(result.objective)) throw std::runtime_error("solve_q_torsion: non-finite energy");

  for (int k = 1; k <= cfg.max_iter; ++k) {
    const auto w = picard_weights(gu, q, eps);
    const ScalarField target = solve_weighted_poisson(mesh, w, 1.0, zero, cg);
    std::vector<double> d(u.values().size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = target[i] - u[i];
    const ScalarField dir(mesh, d);
    const std::vector<Point2> gd = gradients(dir);
    const double fd = load_dot(m, d);

    // phi(theta) = J(u + theta d) is convex; find its minimizer on [0, damping]
    auto slope = [&](double theta) {
      double s = 0.0;
      for (std::size_t t = 0; t < nt; ++t) {
        const double gx = gu[t][0] + theta * gd[t][0], gy = gu[t][1] + theta * gd[t][1];
        s += area[t] * std::pow(gx * gx + gy * gy + eps * eps, 0.5 * (q - 2.0)) * (gx * gd[t][0] + gy * gd[t][1]);
      }
      return s - fd;
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
    double step = 0.0, size = 0.0;
    for (std::size_t i = 0; i < next.size(); ++i) {
      next[i] += theta * d[i];
      step = std::max(step, std::abs(theta * d[i]));
      size = std::max(size, std::abs(next[i]));
    }
    ScalarField candidate(mesh, std::move(next));
    double objective = q_energy(candidate, q, eps);
    if (!std::isfinite(objective)) throw std::runtime_error("solve_q_torsion: non-finite energy");
    // along a descent direction only rounding can make the energy go up
    if (objective > result.objective) {
      result.iterations = k;
      result.converged = (objective - result.objective) <= 1e-12 * std::abs(result.objective);
      break;
    }
    const double decrease = (result.objective - objective) / std::max(std::abs(objective), 1e-300);
    u = std::move(candidate);
    gu = gradients(u);
    result.objective = objective;
    result.iterations = k;
    result.log.push_back({k, objective, theta, interior_residual(u, picard_weights(gu, q, eps))});
    if (decrease < cfg.tol && step <= std::sqrt(cfg.tol) * std::max(size, 1e-300)) {
      result.converged = true;
      break;
    }
  }
  result.field = u;
  return result;
}

ScalarField w_infinity_field(const std::shared_ptr<const Mesh>& mesh) { return boundary_distance_field(mesh); }

double weak_residual(const ScalarField& w, double q, int sample_count, std::uint64_t seed) {
  if (!(q > 1.0) || !std::isfinite(q)) throw std::invalid_argument("weak_residual: q must lie in (1, inf)");
  if (sample_count <= 0) throw std::invalid_argument("weak_residual: sample_count must be positive");
  const Mesh& mesh = w.mesh();
  std::vector<int> interior;
  for (std::size_t v = 0; v < mesh.vertex_count(); ++v)
    if (!mesh.is_boundary(static_cast<int>(v))) interior.push_back(static_cast<int>(v));
  if (interior.empty()) return 0.0;

  std::mt19937_64 rng(seed);
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(sample_count), interior.size());
  // partial Fisher-Yates: deterministic for a given seed on every platform
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng() % (interior.size() - i));
    std::swap(interior[i], interior[j]);
  }
  interior.resize(k);

  std::vector<double> flux(mesh.vertex_count(), 0.0), mass(mesh.vertex_count(), 0.0);
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const auto& g = mesh.hat_gradients(t);
    const Point2 gw = w.gradient(t);
    const double norm = std::hypot(gw[0], gw[1]);
    const double coef = norm > 0.0 ? std::pow(norm, q - 2.0) : 0.0;
    for (int i = 0; i < 3; ++i) {
      flux[tri[i]] += mesh.area(t) * coef * (gw[0] * g[i][0] + gw[1] * g[i][1]);
      mass[tri[i]] += mesh.area(t) / 3.0;
    }
  }
  double worst = 0.0;
  for (int v : interior) worst = std::max(worst, std::abs(flux[v] - mass[v]) / mass[v]);
  return worst;
}

}  // namespace bergman
