#include "agechem/certificate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "agechem/errors.hpp"
#include "agechem/simulator.hpp"

namespace agechem {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMarginalEigen = 1e-12;

// Merges coefficient-weighted exponential terms with equal rates.
std::map<double, double> MergeTerms(const std::vector<std::pair<double, ExpTerm>>& terms) {
  std::map<double, double> by_rate;
  for (const auto& [c, t] : terms) by_rate[t.rate] += c * t.coef;
  for (auto it = by_rate.begin(); it != by_rate.end();) {
    it = it->second == 0.0 ? by_rate.erase(it) : std::next(it);
  }
  return by_rate;
}

// int_{a0}^inf e^{2 sigma a} (sum_i c_i e^{-k_i a})^2 da.
double ExpSquareTail(const std::map<double, double>& terms, double sigma, double a0) {
  double total = 0.0;
  for (const auto& [ki, ci] : terms) {
    if (!(ki > sigma)) throw DomainError("increase sigma infeasible for this h");
    for (const auto& [kj, cj] : terms) {
      const double rate = ki + kj - 2.0 * sigma;
      total += ci * cj * std::exp(-rate * a0) / rate;
    }
  }
  return total;
}

double Normalized(double lhs, double rhs) {
  return (lhs - rhs) / std::max(std::abs(lhs) + std::abs(rhs), std::numeric_limits<double>::min());
}

void RequireRanges(const CertificateConstants& k, double ratio_bound, double s_in) {
  auto bad = [](const char* what) { throw InputError(std::string("certificate constant out of range: ") + what); };
  if (!(k.sigma >= 0.0)) bad("sigma >= 0");
  if (!(k.epsilon > 0.0)) bad("epsilon > 0");
  if (!(k.omega > 0.0)) bad("omega > 0");
  if (!(k.lambda >= 0.0 && k.lambda <= 1.0)) bad("lambda in [0, 1]");
  if (!(k.R1 > 0.0 && k.R2 > 0.0 && k.R3 > 0.0)) bad("R1, R2, R3 > 0");
  if (!(k.B > 0.0 && k.Gamma > 0.0 && k.M > 0.0)) bad("B, Gamma, M > 0");
  if (!(k.F > ratio_bound * s_in)) bad("F > R S_in");
}

}  // namespace

const char* to_string(PdStatus s) {
  switch (s) {
    case PdStatus::kPass:
      return "pass";
    case PdStatus::kMarginal:
      return "marginal";
    case PdStatus::kFail:
      return "fail";
  }
  return "fail";
}

double weighted_inverse_norm(const std::vector<std::pair<double, AgeFunction>>& terms, double sigma,
                             const ModelParams& params) {
  bool all_closed = true;
  std::vector<std::pair<double, ExpTerm>> exp_terms;
  for (const auto& [c, fn] : terms) {
    if (fn.is_tabulated()) {
      all_closed = false;
      break;
    }
    exp_terms.emplace_back(c, *fn.tail_form(0.0));
  }
  if (all_closed) return std::sqrt(std::max(0.0, ExpSquareTail(MergeTerms(exp_terms), sigma, 0.0)));

  // Quadrature up to the last knot (or a_max), closed form beyond it.
  double a_end = params.a_max();
  for (const auto& [c, fn] : terms) {
    if (const auto* t = std::get_if<AgeFunction::Tabulated>(&fn.form())) a_end = std::max(a_end, t->ages.back());
  }
  const auto n = static_cast<std::size_t>(std::ceil(a_end / params.age_step())) + 1;
  const AgeGrid grid(a_end, std::max<std::size_t>(n, 2), QuadratureRule::kGregory);
  std::vector<double> integrand(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double a = grid.age(i);
    double s = 0.0;
    for (const auto& [c, fn] : terms) s += c * fn.value(a);
    integrand[i] = std::exp(2.0 * sigma * a) * s * s;
  }
  exp_terms.clear();
  for (const auto& [c, fn] : terms) exp_terms.emplace_back(c, *fn.tail_form(a_end));
  const double total = grid.integrate(integrand) + ExpSquareTail(MergeTerms(exp_terms), sigma, a_end);
  return std::sqrt(std::max(0.0, total));
}

WeightedNorms weighted_norms(const ModelParams& params, const Equilibrium& eq, const AssumptionBData& data,
                             double sigma) {
  WeightedNorms out;
  out.closed_form = !data.h.is_tabulated() && !data.p.is_tabulated();
  out.rho_inv_h = weighted_inverse_norm({{1.0, data.h}}, sigma, params);
  out.rho_inv_theta_p_minus_h = weighted_inverse_norm({{eq.theta, data.p}, {-1.0, data.h}}, sigma, params);

  // ||rho r||_2^2 with the equilibrium's quadrature and tail.
  const AgeGrid grid = params.grid(eq.rule);
  std::vector<double> integrand(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    integrand[i] = std::exp(-2.0 * sigma * grid.age(i)) * eq.r[i] * eq.r[i];
  }
  double total = grid.integrate(integrand);
  if (eq.include_tail && eq.r_tail) {
    const double rate = 2.0 * (eq.r_tail->rate + sigma);
    total += eq.r_tail->coef * eq.r_tail->coef * std::exp(-rate * grid.a_max()) / rate;
  }
  out.rho_r = std::sqrt(total);
  return out;
}

std::pair<Mat3, double> assemble_P(const ModelParams& params, const Equilibrium& eq, const AssumptionBData& data,
                                   const CertificateConstants& k, const WeightedNorms& norms) {
  const double d = params.dilution();
  const double kappa1 = eq.kappa1;
  const double qr = eq.qr;
  const double s_lower = trapping_s_lower(params, k.F);
  const double g_lo = eq.g(params.mu(), s_lower);
  const double g_hi = eq.g(params.mu(), params.s_in());
  const double delta = data.delta;
  const double shrink = k.B * g_hi * (1.0 + k.epsilon * kappa1 * kappa1);

  const double A = kappa1 * (1.0 - 2.0 * k.B * k.epsilon * delta) +
                   delta * (1.0 - k.B * k.epsilon * delta) / g_hi - shrink -
                   k.Gamma * delta * k.R3 / (2.0 * g_lo) -
                   (1.0 - k.lambda) * k.R1 * norms.rho_inv_theta_p_minus_h / (2.0 * qr * g_lo);
  Mat3 P{};
  P[0][0] = A;
  P[0][1] = P[1][0] = -k.Gamma * kappa1 / 2.0;
  P[0][2] = P[2][0] = (kappa1 - eq.kappa2) / 2.0;
  P[1][1] = k.Gamma * (d - k.R2 * norms.rho_inv_h / (2.0 * g_lo * qr) - delta / (2.0 * k.R3 * g_lo));
  P[1][2] = P[2][1] = (k.Gamma * d + d * k.M - k.Gamma * kappa1) / 2.0;
  P[2][2] = d * k.M - shrink;
  return {P, A};
}

Certificate check_conditions(const ModelParams& params, const Equilibrium& eq, const AssumptionBData& data,
                             const CertificateConstants& constants) {
  RequireRanges(constants, data.ratio_bound, params.s_in());
  const auto& k = constants;
  Certificate cert;
  cert.constants = k;
  cert.ratio_bound = data.ratio_bound;
  cert.s_lower = trapping_s_lower(params, k.F);
  cert.g_lower = eq.g(params.mu(), cert.s_lower);
  cert.g_upper = eq.g(params.mu(), params.s_in());
  cert.norms = weighted_norms(params, eq, data, k.sigma);
  const auto [P, A] = assemble_P(params, eq, data, k, cert.norms);
  cert.P = P;
  cert.A = A;

  const double qr = eq.qr;
  const double nh = cert.norms.rho_inv_h;
  const double ntp = cert.norms.rho_inv_theta_p_minus_h;
  const double nr = cert.norms.rho_r;
  const double d = params.dilution();
  const double L = params.min_mortality();

  const double rhs_3_22 = nh / qr * (nr + k.Gamma / (2.0 * k.B * k.R2)) +
                          (1.0 - k.lambda) * ntp / (2.0 * k.B * k.R1 * qr) + nr * nr / (2.0 * k.epsilon);
  const double lhs_3_22 = L + data.gamma * d + k.sigma;
  cert.G1 = k.B * rhs_3_22;
  cert.G2 = (1.0 - k.lambda) * k.R1 * ntp / (2.0 * qr);
  cert.G3 = k.lambda * ntp * ntp / (2.0 * k.omega * k.B * qr);
  cert.G4 = k.R2 * nh / (2.0 * qr) + data.delta / (2.0 * k.R3);
  cert.c = lhs_3_22 - rhs_3_22;

  ConditionReport& rep = cert.report;
  const double lhs_3_20 = 2.0 * qr * data.alpha;
  const double rhs_3_20 = k.omega * k.lambda;
  const double lhs_3_21 = eq.kappa1 * cert.g_lower + data.delta;
  const double rhs_3_21 = cert.G3;
  const double rhs_3_23 = 2.0 * k.B * k.epsilon * data.delta;
  rep.margin_3_20 = lhs_3_20 - rhs_3_20;
  rep.margin_3_21 = lhs_3_21 - rhs_3_21;
  rep.margin_3_22 = cert.c;
  rep.margin_3_23 = 1.0 - rhs_3_23;
  rep.holds_3_20 = rep.margin_3_20 >= 0.0;
  rep.holds_3_21 = rep.margin_3_21 >= 0.0;
  rep.holds_3_22 = rep.margin_3_22 > 0.0;
  rep.holds_3_23 = rep.margin_3_23 > 0.0;

  rep.lambda_min = symmetric_eigenvalues(P)[0];
  rep.sylvester_pd = sylvester_positive_definite(P);
  if (rep.lambda_min > kMarginalEigen) {
    rep.pd = PdStatus::kPass;
  } else if (rep.lambda_min >= -kMarginalEigen) {
    rep.pd = PdStatus::kMarginal;
  } else {
    rep.pd = PdStatus::kFail;
  }
  rep.overall = rep.holds_3_20 && rep.holds_3_21 && rep.holds_3_22 && rep.holds_3_23 && rep.pd == PdStatus::kPass;

  double p_scale = 0.0;
  for (const auto& row : P) {
    for (double v : row) p_scale = std::max(p_scale, std::abs(v));
  }
  double m = std::min({Normalized(lhs_3_21, rhs_3_21), Normalized(lhs_3_22, rhs_3_22), Normalized(1.0, rhs_3_23),
                       rep.lambda_min / std::max(p_scale, std::numeric_limits<double>::min())});
  if (rep.margin_3_20 < 0.0) m = std::min(m, Normalized(lhs_3_20, rhs_3_20));
  if (rep.pd == PdStatus::kMarginal) m = std::min(m, 0.0);
  rep.normalized_margin = m;

  cert.k0 = std::min(rep.lambda_min * std::min(cert.g_lower, 1.0 / cert.g_upper), cert.c);
  return cert;
}

namespace tothkot {

double threshold_4_9(double L, double k_tilde) {
  if (k_tilde == 0.0) return 0.0;
  return k_tilde * k_tilde / (8.0 * (2.0 * L + k_tilde));
}

double threshold_4_10(double L, double k_tilde) {
  if (k_tilde == 0.0) return L == 0.0 ? 0.0 : kInf;
  return (k_tilde - L) * (k_tilde - L) / (8.0 * k_tilde);
}

std::pair<double, double> gamma_roots(double D, double L, double k_tilde) {
  const double s = std::sqrt(k_tilde / (L + D) + 1.0);
  return {(s - 1.0) * (s - 1.0), (s + 1.0) * (s + 1.0)};
}

double delta_quadratic(double Gamma, double D, double L, double k_tilde) {
  const double u = L + D;
  return u * u * Gamma * Gamma - 2.0 * u * (2.0 * u + k_tilde) * Gamma + k_tilde * k_tilde;
}

double g_tilde(double D, double L, double k_tilde) {
  return 4.0 * D / (L + D) - gamma_roots(D, L, k_tilde).first;
}

double J(double M, double Gamma, double D, double L, double k_tilde) {
  return (L + D) * (-D * D * M * M + D * Gamma * (4.0 * D + 2.0 * L - Gamma * (L + D) + k_tilde) * M -
                    Gamma * Gamma * L * (L + k_tilde));
}

double M_star(double Gamma, double D, double L, double k_tilde) {
  return (4.0 * Gamma * D - Gamma * Gamma * (L + D) + 2.0 * Gamma * L + k_tilde * Gamma) / (2.0 * D);
}

Mat3 P0(double Gamma, double M, double D, double L, double k_tilde) {
  Mat3 P{};
  P[0][0] = L + D;
  P[0][1] = P[1][0] = -Gamma * (L + D) / 2.0;
  P[0][2] = P[2][0] = -k_tilde / 2.0;
  P[1][1] = Gamma * D;
  P[1][2] = P[2][1] = (D * M - Gamma * L) / 2.0;
  P[2][2] = D * M;
  return P;
}

AssumptionBData decomposition(double Y, double D, double L, double k_tilde) {
  AssumptionBData data;
  data.gamma = -L / D;
  data.b = -(k_tilde + L) / D;
  data.alpha = 0.0;
  data.delta = 0.0;
  data.theta = (D + L + k_tilde) / (Y * (D + L));
  data.h = AgeFunction::MakeConstant(0.0);
  data.p = AgeFunction::MakeConstant(0.0);
  data.ratio_bound = Y;
  return data;
}

Recipe recipe(const ModelParams& params, const Equilibrium& eq, double Y, double k_tilde) {
  const double D = params.dilution();
  const double L = params.min_mortality();
  if (!(D > 0.0 && L >= 0.0 && Y > 0.0 && k_tilde >= 0.0)) throw InputError("recipe needs D, Y > 0 and L, k >= 0");
  Recipe out;
  out.gamma1 = gamma_roots(D, L, k_tilde).first;
  out.gamma_upper = 4.0 * D / (L + D);
  out.feasible = g_tilde(D, L, k_tilde) > 0.0;
  std::ostringstream os;
  if (!out.feasible) {
    os << "infeasible: Gamma1 = " << out.gamma1 << " >= 4D/(L+D) = " << out.gamma_upper;
    out.message = os.str();
    return out;
  }

  CertificateConstants k;
  k.Gamma = 0.5 * (out.gamma1 + out.gamma_upper);
  k.M = M_star(k.Gamma, D, L, k_tilde);
  k.sigma = 0.5 * (D + L);
  k.epsilon = 2.0 / (4.0 * k.sigma * (k.sigma + D + L));
  k.lambda = 0.0;
  k.omega = k.R1 = k.R2 = k.R3 = 1.0;
  k.F = 2.0 * Y * params.s_in();
  const double lambda0 = symmetric_eigenvalues(P0(k.Gamma, k.M, D, L, k_tilde))[0];
  const double g_hi = eq.g(params.mu(), params.s_in());
  k.B = lambda0 / (2.0 * g_hi * (1.0 + k.epsilon * eq.kappa1 * eq.kappa1));
  if (!(k.B > 0.0)) {
    os << "recipe produced a non-positive B (lambda_min(P0) = " << lambda0 << ")";
    out.message = os.str();
    out.feasible = false;
    return out;
  }
  out.certificate = check_conditions(params, eq, decomposition(Y, D, L, k_tilde), k);
  const auto& rep = out.certificate->report;
  if (rep.overall) {
    os << "feasible: Gamma in (" << out.gamma1 << ", " << out.gamma_upper << "), lambda_min(P) = " << rep.lambda_min;
  } else {
    os << "recipe constants failed the condition check (lambda_min(P) = " << rep.lambda_min << ", "
       << to_string(rep.pd) << ", c = " << rep.margin_3_22 << ")";
  }
  out.message = os.str();
  return out;
}

std::vector<ScanRow> feasibility_scan(double L, double k_tilde, const std::vector<double>& d_grid) {
  const double t9 = threshold_4_9(L, k_tilde);
  const double t10 = threshold_4_10(L, k_tilde);
  std::vector<ScanRow> rows;
  rows.reserve(d_grid.size());
  for (double D : d_grid) {
    if (!(D > 0.0)) throw InputError("scan grid values must be positive");
    rows.push_back({D, g_tilde(D, L, k_tilde) > 0.0, D > t9, D >= t10});
  }
  return rows;
}

double bisect_flip(double L, double k_tilde, double d_lo, double d_hi, double rel_tol) {
  if (g_tilde(d_lo, L, k_tilde) > 0.0 || !(g_tilde(d_hi, L, k_tilde) > 0.0)) {
    throw InputError("bisect_flip needs an infeasible lower and a feasible upper endpoint");
  }
  while (d_hi - d_lo > rel_tol * d_hi) {
    const double mid = 0.5 * (d_lo + d_hi);
    if (mid <= d_lo || mid >= d_hi) break;
    (g_tilde(mid, L, k_tilde) > 0.0 ? d_hi : d_lo) = mid;
  }
  return 0.5 * (d_lo + d_hi);
}

}  // namespace tothkot

namespace {

// Search coordinates: log10 of sigma, epsilon, omega, R1, R2, R3, Gamma, M,
// B; the fraction of the largest lambda allowed by the first condition; and
// log10(F / (R S_in) - 1).
constexpr std::size_t kDims = 11;
using Point = std::array<double, kDims>;

struct Box {
  Point lo;
  Point hi;
};

Box SearchBox(double scale) {
  const double ls = std::log10(scale);
  Box b;
  b.lo = {ls - 3, -3 - 2 * ls, -3, -3, -3, -3, -3, -3, -8, 0, -3};
  b.hi = {ls + 1, 3 - 2 * ls, 3, 3, 3, 3, 2, 3, 2, 1, 2};
  return b;
}

CertificateConstants Decode(const Point& x, double qr, double alpha, double f_base, std::optional<double> F) {
  CertificateConstants k;
  k.sigma = std::pow(10.0, x[0]);
  k.epsilon = std::pow(10.0, x[1]);
  k.omega = std::pow(10.0, x[2]);
  k.R1 = std::pow(10.0, x[3]);
  k.R2 = std::pow(10.0, x[4]);
  k.R3 = std::pow(10.0, x[5]);
  k.Gamma = std::pow(10.0, x[6]);
  k.M = std::pow(10.0, x[7]);
  k.B = std::pow(10.0, x[8]);
  k.lambda = std::clamp(x[9], 0.0, 1.0) * std::min(1.0, 2.0 * qr * alpha / k.omega);
  k.F = F.value_or(f_base * (1.0 + std::pow(10.0, x[10])));
  return k;
}

}  // namespace

SearchResult search_certificate(const ModelParams& params, const Equilibrium& eq, const AssumptionBData& data,
                                const SearchOptions& options) {
  SearchResult out;
  const double f_base = data.ratio_bound * params.s_in();
  const double scale = params.dilution() + params.min_mortality();
  const Box box = SearchBox(scale);

  double best_value = -kInf;
  Point best_x{};
  auto evaluate = [&](const Point& x) -> double {
    ++out.evaluations;
    double value = -kInf;
    std::optional<Certificate> cert;
    try {
      cert = check_conditions(params, eq, data, Decode(x, eq.qr, data.alpha, f_base, options.F));
      value = cert->report.normalized_margin;
    } catch (const DomainError&) {
      return value;
    }
    // Ties go to the lexicographically smaller candidate.
    if (value > best_value || (value == best_value && out.best && x < best_x)) {
      best_value = value;
      best_x = x;
      out.best = std::move(cert);
      out.found = out.best->report.overall;
    }
    return value;
  };
  auto exhausted = [&] { return out.evaluations >= options.budget; };

  std::mt19937_64 rng(options.seed);
  const std::int64_t random_phase = options.budget / 2;
  while (!exhausted() && !out.found && out.evaluations < random_phase) {
    Point x;
    for (std::size_t i = 0; i < kDims; ++i) {
      x[i] = std::uniform_real_distribution<double>(box.lo[i], box.hi[i])(rng);
    }
    evaluate(x);
  }

  Point step;
  step.fill(0.5);
  step[9] = 0.25;
  while (!exhausted() && !out.found && out.best) {
    bool improved = false;
    for (std::size_t i = 0; i < kDims && !exhausted() && !out.found; ++i) {
      if (i == kDims - 1 && options.F) continue;
      for (double dir : {1.0, -1.0}) {
        if (exhausted() || out.found) break;
        Point x = best_x;
        x[i] = std::clamp(x[i] + dir * step[i], box.lo[i], box.hi[i]);
        if (x == best_x) continue;
        const double before = best_value;
        evaluate(x);
        if (best_value > before) {
          improved = true;
          break;
        }
      }
    }
    if (!improved) {
      for (double& s : step) s *= 0.5;
      if (step[0] < 1e-6) break;
    }
  }

  std::ostringstream os;
  if (out.found) {
    os << "found after " << out.evaluations << " evaluations";
  } else {
    os << "not found (non-conclusive: the conditions are sufficient, not necessary); best normalized margin "
       << (out.best ? best_value : -kInf) << " after " << out.evaluations << " evaluations";
  }
  out.message = os.str();
  return out;
}

}  // namespace agechem
