#include "agechem/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "agechem/errors.hpp"

namespace agechem {

namespace {

constexpr double kBisectionRelTol = 1e-14;
constexpr int kMaxBisection = 200;

}  // namespace

std::vector<double> decay_factors(const ModelParams& params) {
  const AgeGrid grid = params.grid();
  const double h = grid.step();
  const double d = params.dilution();
  std::vector<double> out(grid.size() - 1);
  double beta_left = params.beta().value(0.0);
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double beta_right = params.beta().value(grid.age(i + 1));
    out[i] = std::exp(-(d + 0.5 * (beta_left + beta_right)) * h);
    beta_left = beta_right;
  }
  return out;
}

std::vector<double> survivor_profile(const ModelParams& params) {
  const std::vector<double> decay = decay_factors(params);
  std::vector<double> r(decay.size() + 1);
  r[0] = 1.0;
  for (std::size_t i = 0; i < decay.size(); ++i) r[i + 1] = r[i] * decay[i];
  return r;
}

std::optional<ExpTerm> survivor_tail(const ModelParams& params, double r_at_a_max) {
  const auto beta_tail = params.beta().tail_form(params.a_max());
  if (!beta_tail || beta_tail->rate != 0.0 || !(r_at_a_max > 0.0)) return std::nullopt;
  const double rate = params.dilution() + beta_tail->coef;
  return ExpTerm{std::exp(std::log(r_at_a_max) + rate * params.a_max()), rate};
}

double exp_product_integral(const ExpTerm& u, const ExpTerm& v) {
  const double c = u.coef * v.coef;
  if (c == 0.0) return 0.0;
  const double rate = u.rate + v.rate;
  if (!(rate > 0.0)) return std::copysign(std::numeric_limits<double>::infinity(), c);
  return c / rate;
}

MomentResult moment_detail(const AgeFunction& weight, std::span<const double> profile, const AgeGrid& grid,
                           const MomentOptions& options) {
  if (profile.size() != grid.size()) throw InputError("profile does not match the age grid");
  std::vector<double> product(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) product[i] = weight.value(grid.age(i)) * profile[i];
  MomentResult out;
  out.value = grid.integrate(product);
  if (!options.include_tail) return out;

  const double a_max = grid.a_max();
  const auto weight_tail = weight.tail_form(a_max);
  if (weight_tail && options.profile_tail) {
    const double c = weight_tail->coef * options.profile_tail->coef;
    const double rate = weight_tail->rate + options.profile_tail->rate;
    if (c != 0.0) {
      if (!(rate > 0.0)) throw DomainError("a_max too small: moment tail does not decay");
      out.tail = c * std::exp(-rate * a_max) / rate;
    }
    out.tail_exact = true;
    out.value += out.tail;
    return out;
  }

  // No closed form: bound the tail by the last product value over a span of
  // one a_max and require it to be negligible.
  const double estimate = std::abs(product.back()) * a_max;
  out.tail = estimate;
  const double scale = std::max(std::abs(out.value), std::numeric_limits<double>::min());
  if (estimate > options.tail_tol * scale) {
    std::ostringstream os;
    os << "a_max too small: estimated moment tail " << estimate << " exceeds " << options.tail_tol
       << " relative";
    throw DomainError(os.str());
  }
  out.tail = 0.0;
  return out;
}

double moment(const AgeFunction& weight, std::span<const double> profile, const AgeGrid& grid,
              const MomentOptions& options) {
  return moment_detail(weight, profile, grid, options).value;
}

std::vector<double> Equilibrium::f_star_profile() const {
  std::vector<double> out(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) out[i] = f_star0 * r[i];
  return out;
}

MomentOptions Equilibrium::moment_options() const {
  MomentOptions opts;
  opts.include_tail = include_tail;
  opts.profile_tail = r_tail;
  return opts;
}

Equilibrium solve_equilibrium(const ModelParams& params, EquilibriumScheme scheme) {
  Equilibrium eq;
  eq.scheme = scheme;
  eq.s_in = params.s_in();
  eq.rule = scheme == EquilibriumScheme::kAccurate ? QuadratureRule::kGregory : QuadratureRule::kTrapezoid;
  eq.include_tail = scheme == EquilibriumScheme::kAccurate;
  eq.r = survivor_profile(params);
  if (eq.include_tail) eq.r_tail = survivor_tail(params, eq.r.back());

  const AgeGrid grid = params.grid(eq.rule);
  const MomentOptions opts = eq.moment_options();
  eq.kr = moment(params.k(), eq.r, grid, opts);
  eq.qr = moment(params.q(), eq.r, grid, opts);
  eq.r_norm1 = moment(AgeFunction::MakeConstant(1.0), eq.r, grid, opts);

  const GrowthLaw& mu = params.mu();
  const double s_in = params.s_in();
  if (!(eq.kr > 0.0) || !(eq.qr > 0.0) || mu.value(s_in) * eq.kr <= 1.0) {
    std::ostringstream os;
    os << "no interior equilibrium (washout regime): mu(S_in) <k,r> = " << mu.value(s_in) * eq.kr;
    throw DomainError(os.str());
  }

  // mu(S) <k,r> - 1 is increasing in S, negative at 0 and positive at S_in.
  double lo = 0.0;
  double hi = s_in;
  int iterations = 0;
  while (iterations < kMaxBisection && hi - lo > kBisectionRelTol * hi) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (mu.value(mid) * eq.kr < 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    ++iterations;
  }
  eq.bisection_iterations = iterations;
  eq.s_star = 0.5 * (lo + hi);
  eq.mu_star = mu.value(eq.s_star);
  eq.f_star0 = params.dilution() * (s_in - eq.s_star) / (eq.mu_star * eq.qr);
  eq.theta = eq.qr / eq.kr;
  eq.kappa1 = params.q().value(0.0) / eq.qr;
  eq.kappa2 = params.k().value(0.0) / eq.kr;
  return eq;
}

}  // namespace agechem
