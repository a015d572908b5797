#include <bergman/fem.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace bergman {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_weights(const Mesh& mesh, std::span<const double> weights) {
  if (weights.empty()) return;
  if (weights.size() != mesh.triangle_count())
    throw std::invalid_argument("weights must have one entry per triangle");
  for (double w : weights)
    if (!(w > 0.0) || !std::isfinite(w)) throw std::invalid_argument("weights must be positive and finite");
}

}  // namespace

SparseSystem::SparseSystem(const Mesh& mesh, std::span<const double> weights, double rhs_density)
    : mesh_(mesh) {
  check_weights(mesh, weights);
  const std::size_t n = mesh.vertex_count();
  std::vector<Triplet> entries;
  entries.reserve(9 * mesh.triangle_count());
  load_.assign(n, 0.0);
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const auto& g = mesh.hat_gradients(t);
    const double scale = (weights.empty() ? 1.0 : weights[t]) * mesh.area(t);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j)
        entries.push_back({tri[i], tri[j], scale * (g[i][0] * g[j][0] + g[i][1] * g[j][1])});
      load_[tri[i]] += rhs_density * mesh.area(t) / 3.0;
    }
  }
  stiffness_ = CsrMatrix::from_triplets(n, std::move(entries));
  fixed_.assign(n, kNaN);
  group_.assign(n, -1);
}

void SparseSystem::fix(int vertex, double value) {
  if (group_[vertex] >= 0) throw std::invalid_argument("vertex is already tied to a floating constant");
  fixed_[vertex] = value;
}

void SparseSystem::fix_component(int component, const std::function<double(const Point2&)>& g) {
  for (std::size_t v = 0; v < mesh_.vertex_count(); ++v)
    if (mesh_.vertex_component(static_cast<int>(v)) == component)
      fix(static_cast<int>(v), g(mesh_.vertices()[v]));
}

void SparseSystem::tie(int component, double flux_target) {
  if (component < 0 || component >= mesh_.component_count())
    throw std::invalid_argument("tie: no such boundary component");
  const int g = static_cast<int>(flux_targets_.size());
  for (std::size_t v = 0; v < mesh_.vertex_count(); ++v) {
    if (mesh_.vertex_component(static_cast<int>(v)) != component) continue;
    if (!std::isnan(fixed_[v]) || group_[v] >= 0)
      throw std::invalid_argument("tied group overlaps other constraints");
    group_[v] = g;
  }
  flux_targets_.push_back(flux_target);
}

SparseSystem::Solution SparseSystem::solve(const CgOptions& options, std::span<const double> initial) const {
  const std::size_t n = mesh_.vertex_count();
  const int groups = static_cast<int>(flux_targets_.size());
  std::vector<int> reduced(n, -1);
  int next = groups;
  for (std::size_t v = 0; v < n; ++v) {
    if (group_[v] >= 0)
      reduced[v] = group_[v];
    else if (std::isnan(fixed_[v]))
      reduced[v] = next++;
  }
  const std::size_t m = static_cast<std::size_t>(next);

  std::vector<Triplet> entries;
  entries.reserve(stiffness_.nonzeros());
  std::vector<double> rhs(m, 0.0);
  for (int g = 0; g < groups; ++g) rhs[g] = flux_targets_[g];
  const auto& rp = stiffness_.row_ptr();
  const auto& cols = stiffness_.cols();
  const auto& vals = stiffness_.values();
  for (std::size_t i = 0; i < n; ++i) {
    const int ri = reduced[i];
    if (ri < 0) continue;
    rhs[ri] += load_[i];
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) {
      const int j = cols[k];
      if (reduced[j] >= 0)
        entries.push_back({ri, reduced[j], vals[k]});
      else
        rhs[ri] -= vals[k] * fixed_[j];
    }
  }
  const CsrMatrix reduced_matrix = CsrMatrix::from_triplets(m, std::move(entries));

  std::vector<double> x(m, 0.0);
  if (!initial.empty()) {
    if (initial.size() != n) throw std::invalid_argument("initial guess has the wrong size");
    std::vector<int> count(groups, 0);
    for (std::size_t v = 0; v < n; ++v) {
      if (reduced[v] < 0) continue;
      if (group_[v] >= 0) {
        x[reduced[v]] += initial[v];
        ++count[group_[v]];
      } else {
        x[reduced[v]] = initial[v];
      }
    }
    for (int g = 0; g < groups; ++g)
      if (count[g] > 0) x[g] /= count[g];
  }

  Solution out;
  out.cg = conjugate_gradient(reduced_matrix, rhs, x, options);
  out.values.resize(n);
  for (std::size_t v = 0; v < n; ++v) out.values[v] = reduced[v] >= 0 ? x[reduced[v]] : fixed_[v];
  out.tied_constants.assign(x.begin(), x.begin() + groups);
  return out;
}

ScalarField solve_weighted_poisson(const std::shared_ptr<const Mesh>& mesh, std::span<const double> weight,
                                   double rhs_density, const DirichletData& dirichlet, const CgOptions& options) {
  SparseSystem system(*mesh, weight, rhs_density);
  for (int c = 0; c < mesh->component_count(); ++c) {
    const auto it = dirichlet.find(c);
    if (it == dirichlet.end())
      throw std::invalid_argument("dirichlet data missing for boundary component " + std::to_string(c));
    system.fix_component(c, it->second);
  }
  auto sol = system.solve(options);
  if (!sol.cg.converged)
    throw LinearSolveError("weighted Poisson solve: CG stopped after " + std::to_string(sol.cg.iterations) +
                           " iterations at relative residual " + std::to_string(sol.cg.relative_residual));
  return ScalarField(mesh, std::move(sol.values));
}

FloatingSolution floating_boundary_solve(const std::shared_ptr<const Mesh>& mesh, double rhs_density,
                                         std::optional<std::vector<double>> flux_targets,
                                         const CgOptions& options) {
  const int holes = mesh->component_count() - 1;
  std::vector<double> targets;
  if (flux_targets) {
    if (static_cast<int>(flux_targets->size()) != holes)
      throw std::invalid_argument("one flux target per hole is required");
    targets = *flux_targets;
  } else {
    for (double a : mesh->hole_areas()) targets.push_back(2.0 * a);
  }

  SparseSystem system(*mesh, {}, rhs_density);
  system.fix_component(0, [](const Point2&) { return 0.0; });
  for (int c = 1; c <= holes; ++c) system.tie(c, targets[c - 1]);
  auto sol = system.solve(options);
  if (!sol.cg.converged)
    throw LinearSolveError("floating boundary solve: CG stopped after " + std::to_string(sol.cg.iterations) +
                           " iterations at relative residual " + std::to_string(sol.cg.relative_residual));

  ScalarField field(mesh, std::move(sol.values));
  const auto all = boundary_fluxes(field, rhs_density);
  FloatingSolution out{field, sol.tied_constants, std::vector<double>(all.begin() + 1, all.end()), sol.cg};

  // the tied rows are part of the reduced residual, so the fluxes must match
  double scale = 0.0;
  for (double v : system.load()) scale += std::abs(v);
  for (double t : targets) scale += std::abs(t);
  for (int i = 0; i < holes; ++i) {
    if (std::abs(out.fluxes[i] - targets[i]) > 1e-6 * std::max(scale, 1.0))
      throw LinearSolveError("floating boundary solve: flux mismatch on hole " + std::to_string(i + 1) + " (" +
                             std::to_string(out.fluxes[i]) + " vs target " + std::to_string(targets[i]) + ")");
  }
  return out;
}

std::vector<double> boundary_fluxes(const ScalarField& u, double rhs_density, std::span<const double> weights) {
  const Mesh& mesh = u.mesh();
  SparseSystem system(mesh, weights, rhs_density);
  std::vector<double> ku;
  system.stiffness().multiply(u.values(), ku);
  std::vector<double> out(mesh.component_count(), 0.0);
  for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
    const int c = mesh.vertex_component(static_cast<int>(v));
    if (c >= 0) out[c] += ku[v] - system.load()[v];
  }
  return out;
}

double grad_p_norm(const ScalarField& u, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("grad_p_norm needs p >= 1");
  const Mesh& mesh = u.mesh();
  if (std::isinf(p)) {
    double m = 0.0;
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
      const Point2 g = u.gradient(t);
      m = std::max(m, std::hypot(g[0], g[1]));
    }
    return m;
  }
  double s = 0.0;
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    const Point2 g = u.gradient(t);
    s += mesh.area(t) * std::pow(std::hypot(g[0], g[1]), p);
  }
  return std::pow(s, 1.0 / p);
}

std::vector<double> hat_residuals(const ScalarField& u, std::span<const double> weights, double rhs_density,
                                  std::span<const int> vertices) {
  const Mesh& mesh = u.mesh();
  check_weights(mesh, weights);
  std::vector<double> r(mesh.vertex_count(), 0.0);
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const auto& g = mesh.hat_gradients(t);
    const Point2 gu = u.gradient(t);
    const double w = (weights.empty() ? 1.0 : weights[t]) * mesh.area(t);
    for (int i = 0; i < 3; ++i)
      r[tri[i]] += w * (gu[0] * g[i][0] + gu[1] * g[i][1]) - rhs_density * mesh.area(t) / 3.0;
  }
  std::vector<double> out;
  out.reserve(vertices.size());
  for (int v : vertices) out.push_back(std::abs(r[v]));
  return out;
}

}  // namespace bergman
