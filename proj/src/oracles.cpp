#include <bergman/oracles.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace bergman {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

std::vector<double> uniform_grid(double a, double b, std::size_t n = 1001) {
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i)
    g[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  g.back() = b;
  return g;
}

// sign(y) |y|^a
double signed_pow(double y, double a) {
  if (y == 0.0) return 0.0;
  return std::copysign(std::pow(std::abs(y), a), y);
}

}  // namespace

double unit_ball_volume(int N) {
  require(N >= 0, "dimension must be nonnegative");
  double v = (N % 2 == 0) ? 1.0 : 2.0;
  for (int k = (N % 2 == 0) ? 2 : 3; k <= N; k += 2) v *= 2.0 * std::numbers::pi / k;
  return v;
}

double unit_sphere_area(int N) { return N * unit_ball_volume(N); }

double dual_exponent(double p) {
  require(p >= 1.0, "exponent must be >= 1");
  if (p == 1.0) return kInf;
  if (std::isinf(p)) return 1.0;
  return p / (p - 1.0);
}

double qq_ball(int N, double p, double r) {
  require(N >= 2, "qq_ball: N must be >= 2");
  require(std::isfinite(p) && p >= 1.0, "qq_ball: p must be in [1, inf)");
  require(std::isfinite(r) && r > 0.0, "qq_ball: radius must be positive");
  const double nd = N;
  return std::pow(nd / (nd + p) * unit_ball_volume(N), 1.0 / p) * std::pow(r, 1.0 + nd / p);
}

double qinf_annulus(int N, double r, double R) {
  require(N >= 2, "qinf_annulus: N must be >= 2");
  require(r > 0.0 && r < R, "qinf_annulus: requires 0 < r < R");
  const double nd = N;
  return nd * unit_ball_volume(N) / (nd + 1.0) *
         (std::pow(R, nd + 1.0) + std::pow(r, nd + 1.0) - std::pow(R + r, nd + 1.0) / std::pow(2.0, nd));
}

double equivalent_ball_radius(double volume, int N) {
  require(std::isfinite(volume) && volume > 0.0, "equivalent_ball_radius: volume must be positive");
  require(N >= 1, "equivalent_ball_radius: dimension must be positive");
  return std::pow(volume / unit_ball_volume(N), 1.0 / N);
}

double RadialProfile::value_at(double rho) const {
  if (radii.empty()) throw std::logic_error("empty radial profile");
  if (rho <= radii.front()) return values.front();
  if (rho >= radii.back()) return values.back();
  const auto it = std::upper_bound(radii.begin(), radii.end(), rho);
  const std::size_t i = static_cast<std::size_t>(it - radii.begin()) - 1;
  const double h = radii[i + 1] - radii[i];
  const double t = (rho - radii[i]) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * values[i] + (t3 - 2 * t2 + t) * h * derivatives[i] +
         (-2 * t3 + 3 * t2) * values[i + 1] + (t3 - t2) * h * derivatives[i + 1];
}

RadialSolution::RadialSolution(int N, double q, double r_inner, double r_outer, RadialProblem problem,
                               double quadrature_tol)
    : N_(N), q_(q), r_in_(r_inner), r_out_(r_outer), problem_(problem), tol_(quadrature_tol) {
  require(N >= 2, "radial_solve: N must be >= 2");
  require(q > 1.0, "radial_solve: q must be in (1, inf]");
  require(r_inner >= 0.0 && r_inner < r_outer, "radial_solve: requires 0 <= r_inner < r_outer");

  if (problem == RadialProblem::rigidity_with_flux) {
    require(q == 2.0, "radial_solve: rigidity_with_flux requires q = 2");
    require(r_inner > 0.0, "radial_solve: rigidity_with_flux requires an annulus");
    // -v'(r) * |S| r^{N-1} = 2 m(B) r^N  =>  v'(r) = -2 r / N
    flux_constant_ = std::pow(r_inner, N) * (1.0 - 2.0 / N);
    return;
  }
  if (r_inner == 0.0) return;
  if (std::isinf(q)) {
    rho_star_ = 0.5 * (r_inner + r_outer);
    return;
  }

  // w' changes sign at rho_star; the Dirichlet mismatch int w' is increasing in rho_star.
  auto mismatch = [&](double rs) {
    rho_star_ = rs;
    return integrate_split([this](double t) { return derivative(t); }, r_in_, r_out_);
  };
  double lo = r_inner, hi = r_outer;
  const double scale = std::abs(mismatch(0.5 * (lo + hi))) + (r_outer - r_inner) * 1e-3;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double m = mismatch(mid);
    if (std::abs(m) <= 1e-12 * std::max(1.0, scale)) {
      rho_star_ = mid;
      return;
    }
    (m < 0.0 ? lo : hi) = mid;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * r_outer) break;
  }
  rho_star_ = 0.5 * (lo + hi);
}

double RadialSolution::derivative(double t) const {
  const double nd = N_;
  if (problem_ == RadialProblem::rigidity_with_flux)
    return -t + flux_constant_ * std::pow(t, 1.0 - nd);
  if (std::isinf(q_)) {
    if (r_in_ == 0.0) return -1.0;
    return t < rho_star_ ? 1.0 : (t > rho_star_ ? -1.0 : 0.0);
  }
  const double a = 1.0 / (q_ - 1.0);  // p - 1
  if (r_in_ == 0.0) return -std::pow(t / nd, a);
  const double flux = (std::pow(rho_star_, nd) * std::pow(t, 1.0 - nd) - t) / nd;
  return signed_pow(flux, a);
}

double RadialSolution::integrate(const std::function<double(double)>& f, double a, double b) const {
  if (a == b) return 0.0;
  using gk = boost::math::quadrature::gauss_kronrod<double, 31>;
  struct Piece {
    double a, b, value, error, l1;
    bool operator<(const Piece& o) const { return error < o.error; }
  };
  // the non-adaptive rule reports its error on the reference interval [-1, 1]
  auto rule = [&](double lo, double hi) {
    Piece p{lo, hi, 0.0, 0.0, 0.0};
    p.value = gk::integrate(f, lo, hi, 0, 0.0, &p.error, &p.l1);
    p.error *= 0.5 * (hi - lo);
    return p;
  };
  std::priority_queue<Piece> queue;
  queue.push(rule(a, b));
  double value = queue.top().value, error = queue.top().error, l1 = queue.top().l1;
  for (int it = 0; it < 4000; ++it) {
    const double eps_floor = 64.0 * std::numeric_limits<double>::epsilon() * l1;
    if (error <= std::max(tol_ * std::abs(value), eps_floor)) break;
    const Piece worst = queue.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;
    queue.pop();
    const Piece left = rule(worst.a, mid), right = rule(mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    l1 += left.l1 + right.l1 - worst.l1;
    queue.push(left);
    queue.push(right);
  }
  if (!std::isfinite(value) || error > 1e-10 * std::max(l1, 1e-300) + 1e-300)
    throw QuadratureError("radial quadrature did not reach tolerance on [" + std::to_string(a) + ", " +
                          std::to_string(b) + "]");
  return value;
}

bool RadialSolution::is_cusp(double t) const {
  // |flux|^{p-1} with p - 1 < 1 is not smooth where the flux vanishes
  if (problem_ != RadialProblem::q_torsion || std::isinf(q_) || q_ <= 2.0) return false;
  return r_in_ == 0.0 ? t == 0.0 : t == rho_star_;
}

double RadialSolution::integrate_piece(const std::function<double(double)>& f, double a,
                                       double b) const {
  const bool sa = is_cusp(a), sb = is_cusp(b);
  if (!sa && !sb) return integrate(f, a, b);
  if (sa && sb) {
    const double mid = 0.5 * (a + b);
    return integrate_piece(f, a, mid) + integrate_piece(f, mid, b);
  }
  // t = cusp +- len * s^m turns |t - cusp|^{p-1} into a smooth power of s
  const double m = std::ceil(2.0 * (q_ - 1.0));
  const double len = b - a;
  const double origin = sa ? a : b;
  const double dir = sa ? 1.0 : -1.0;
  auto g = [&](double s) {
    if (s == 0.0) return 0.0;
    return f(origin + dir * len * std::pow(s, m)) * len * m * std::pow(s, m - 1.0);
  };
  return integrate(g, 0.0, 1.0);
}

double RadialSolution::integrate_split(const std::function<double(double)>& f, double a,
                                       double b) const {
  if (rho_star_ > a && rho_star_ < b)
    return integrate_piece(f, a, rho_star_) + integrate_piece(f, rho_star_, b);
  return integrate_piece(f, a, b);
}

double RadialSolution::value(double rho) const {
  require(rho >= r_in_ && rho <= r_out_, "radial value requested outside the domain");
  if (std::isinf(q_) && problem_ == RadialProblem::q_torsion)
    return r_in_ == 0.0 ? r_out_ - rho : std::min(rho - r_in_, r_out_ - rho);
  return -integrate_split([this](double t) { return derivative(t); }, rho, r_out_);
}

double RadialSolution::volume_integral() const {
  // int_r^R w t^{N-1} dt = -w(r) r^N / N - (1/N) int_r^R w'(t) t^N dt
  const double nd = N_;
  const double inner = r_in_ > 0.0 ? value(r_in_) * std::pow(r_in_, nd) / nd : 0.0;
  const double moment = integrate_split(
      [this, nd](double t) { return derivative(t) * std::pow(t, nd); }, r_in_, r_out_);
  return unit_sphere_area(N_) * (-inner - moment / nd);
}

double RadialSolution::gradient_power_integral(double s) const {
  const double nd = N_;
  return unit_sphere_area(N_) *
         integrate_split([this, s, nd](double t) {
           return std::pow(std::abs(derivative(t)), s) * std::pow(t, nd - 1.0);
         },
                         r_in_, r_out_);
}

RadialProfile RadialSolution::sample(std::span<const double> radii) const {
  std::vector<double> grid(radii.begin(), radii.end());
  if (grid.empty()) grid = uniform_grid(r_in_, r_out_);
  require(std::is_sorted(grid.begin(), grid.end()), "radii must be increasing");
  require(grid.front() >= r_in_ && grid.back() <= r_out_, "radii must lie in the domain");

  RadialProfile out;
  out.dimension = N_;
  out.q_exponent = q_;
  out.radii = grid;
  out.values.assign(grid.size(), 0.0);
  out.derivatives.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) out.derivatives[i] = derivative(grid[i]);

  // accumulate from the outer boundary inwards
  auto wprime = [this](double t) { return derivative(t); };
  double acc = (grid.back() < r_out_) ? -integrate_split(wprime, grid.back(), r_out_) : 0.0;
  if (std::isinf(q_) && problem_ == RadialProblem::q_torsion) {
    for (std::size_t i = 0; i < grid.size(); ++i) out.values[i] = value(grid[i]);
    return out;
  }
  out.values.back() = acc;
  for (std::size_t i = grid.size() - 1; i-- > 0;) {
    acc -= integrate_split(wprime, grid[i], grid[i + 1]);
    out.values[i] = acc;
  }
  return out;
}

RadialProfile wq_ball_profile(int N, double q, double r, std::span<const double> radii) {
  require(N >= 2, "wq_ball_profile: N must be >= 2");
  require(q > 1.0, "wq_ball_profile: q must be > 1");
  require(std::isfinite(r) && r > 0.0, "wq_ball_profile: radius must be positive");
  const double p = dual_exponent(q);
  const double c = std::pow(static_cast<double>(N), 1.0 - p);

  RadialProfile out;
  out.dimension = N;
  out.q_exponent = q;
  out.radii.assign(radii.begin(), radii.end());
  if (out.radii.empty()) out.radii = uniform_grid(0.0, r);
  for (double t : out.radii) {
    out.values.push_back(c * (std::pow(r, p) - std::pow(t, p)) / p);
    out.derivatives.push_back(-c * std::pow(t, p - 1.0));
  }
  return out;
}

RadialProfile radial_solve(int N, double q, double r_inner, double r_outer, RadialProblem problem,
                           std::span<const double> radii) {
  return RadialSolution(N, q, r_inner, r_outer, problem).sample(radii);
}

}  // namespace bergman
