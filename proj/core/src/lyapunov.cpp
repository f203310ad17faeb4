#include "agechem/lyapunov.hpp"

#include <cmath>
#include <numeric>

#include "agechem/errors.hpp"

namespace agechem {

namespace {

constexpr double kQTol = 1e-10;
constexpr double kQEdge = 1e-6;
constexpr int kQMaxDepth = 50;

template <class F>
double AdaptiveSimpson(const F& f, double a, double b, double fa, double fm, double fb, double whole, double tol,
                       int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double diff = left + right - whole;
  if (depth <= 0 || std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
  return AdaptiveSimpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         AdaptiveSimpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double UBreakdown::total() const { return std::accumulate(terms.begin(), terms.end(), 0.0); }

LyapunovEvaluator::LyapunovEvaluator(ModelParams params, Equilibrium eq, LyapunovWeights weights)
    : params_(std::move(params)), eq_(std::move(eq)), weights_(weights) {
  if (!(weights_.sigma >= 0.0 && weights_.B > 0.0 && weights_.Gamma > 0.0 && weights_.M > 0.0)) {
    throw InputError("Lyapunov weights need sigma >= 0 and B, Gamma, M > 0");
  }
  if (eq_.r.size() != params_.n_age()) throw InputError("equilibrium does not match the age grid");
  const AgeGrid grid = params_.grid(eq_.rule);
  w_ = grid.weights();
  k_ = grid.sample(params_.k());
  q_ = grid.sample(params_.q());
  beta_ = grid.sample(params_.beta());
  rho2_.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) rho2_[i] = std::exp(-2.0 * weights_.sigma * grid.age(i));
  f_star_ = eq_.f_star_profile();
}

double LyapunovEvaluator::dot(const std::vector<double>& a, const std::vector<double>& b) const {
  double s = 0.0;
  for (std::size_t i = 0; i < w_.size(); ++i) s += w_[i] * a[i] * b[i];
  return s;
}

NormalizedVars LyapunovEvaluator::normalized_vars(const State& state) const {
  if (state.f.size() != w_.size()) throw InputError("state does not match the age grid");
  const double s_in = params_.s_in();
  if (!(state.s > 0.0 && state.s < s_in)) throw DomainError("state outside X: S not in (0, S_in)");
  const double qf = dot(q_, state.f);
  const double kf = dot(k_, state.f);
  if (!(qf > 0.0 && kf > 0.0)) throw DomainError("state outside X: <q,f> and <k,f> must be positive");

  NormalizedVars nv;
  nv.zeta = qf / (eq_.f_star0 * eq_.qr);
  nv.xi = kf / (eq_.f_star0 * eq_.kr);
  const double scale = 1.0 / (eq_.f_star0 * nv.zeta);
  nv.v.resize(state.f.size());
  nv.chi.resize(state.f.size());
  for (std::size_t i = 0; i < state.f.size(); ++i) {
    nv.v[i] = state.f[i] * scale;
    nv.chi[i] = nv.v[i] - eq_.r[i];
  }
  nv.phi = std::log(nv.xi / nv.zeta);
  nv.w = std::log((s_in - eq_.s_star) / (s_in - state.s) * nv.zeta);
  nv.g = eq_.g(params_.mu(), state.s);
  nv.x = params_.mu().value(state.s) * kf;
  return nv;
}

double LyapunovEvaluator::Q_of_S(double s) const {
  const double s_in = params_.s_in();
  if (!(s >= kQEdge * s_in && s <= (1.0 - kQEdge) * s_in)) {
    throw InputError("Q(S) evaluated outside [1e-6 S_in, (1 - 1e-6) S_in]");
  }
  const double s_star = eq_.s_star;
  if (s == s_star) return 0.0;
  const GrowthLaw& mu = params_.mu();
  const double m = weights_.M;
  auto integrand = [&](double u) {
    const double g = eq_.g(mu, u);
    return m * (g - 1.0) / ((s_in - u) * g);
  };
  const double fa = integrand(s_star);
  const double fb = integrand(s);
  const double fm = integrand(0.5 * (s_star + s));
  const double whole = (s - s_star) / 6.0 * (fa + 4.0 * fm + fb);
  return AdaptiveSimpson(integrand, s_star, s, fa, fm, fb, whole, kQTol, kQMaxDepth);
}

LyapunovValues LyapunovEvaluator::evaluate(const State& state) const {
  const NormalizedVars nv = normalized_vars(state);
  LyapunovValues out;
  const double ephi = std::exp(nv.phi);
  const double ew = std::exp(nv.w);
  out.V_phi = ephi - nv.phi - 1.0;
  out.V_w = weights_.Gamma * (ew - nv.w - 1.0);
  out.Q = Q_of_S(state.s);
  double rcs = 0.0;
  double dev_max = 0.0;
  double dev_l1 = 0.0;
  for (std::size_t i = 0; i < w_.size(); ++i) {
    rcs += w_[i] * rho2_[i] * nv.chi[i] * nv.chi[i];
    const double dev = std::abs(state.f[i] - f_star_[i]);
    dev_max = std::max(dev_max, dev);
    dev_l1 += w_[i] * dev;
  }
  out.rho_chi_sq = rcs;
  out.V_chi = 0.5 * weights_.B * rcs;
  out.V = out.V_phi + out.V_w + out.Q + out.V_chi;
  out.Psi = std::abs(state.s - eq_.s_star) + dev_max + dev_l1 + out.V;
  const double g = nv.g;
  out.E = (ephi - 1.0) * (ephi - 1.0) + (ew - 1.0) * (ew - 1.0) + (g - 1.0) * (g - 1.0) + rcs;
  return out;
}

UBreakdown LyapunovEvaluator::derivative_U(const State& state, const AssumptionBData& data) const {
  const NormalizedVars nv = normalized_vars(state);
  const AgeGrid grid = params_.grid(eq_.rule);
  const std::vector<double> h = grid.sample(data.h);
  const std::vector<double> p = grid.sample(data.p);

  const double qr = eq_.qr;
  const double theta = eq_.theta;
  const double k1 = eq_.kappa1;
  const double k2 = eq_.kappa2;
  const double d = params_.dilution();
  const double B = weights_.B;
  const double G = weights_.Gamma;
  const double M = weights_.M;
  const double g = nv.g;
  const double e1 = std::exp(nv.phi) - 1.0;
  const double w1 = std::exp(nv.w) - 1.0;
  const double kgd = k1 * g + data.delta;

  double pv = 0.0, tpc = 0.0, hc = 0.0, hv = 0.0, rcs = 0.0, brc = 0.0, rrc = 0.0;
  for (std::size_t i = 0; i < w_.size(); ++i) {
    const double wi = w_[i];
    const double chi = nv.chi[i];
    pv += wi * p[i] * nv.v[i];
    tpc += wi * (theta * p[i] - h[i]) * chi;
    hc += wi * h[i] * chi;
    hv += wi * h[i] * nv.v[i];
    rcs += wi * rho2_[i] * chi * chi;
    brc += wi * beta_[i] * rho2_[i] * chi * chi;
    rrc += wi * rho2_[i] * eq_.r[i] * chi;
  }

  UBreakdown u;
  auto& t = u.terms;
  t[0] = -(data.alpha + theta * pv / qr) * std::exp(-nv.phi) * e1 * e1;
  t[1] = -kgd * e1 * e1;
  t[2] = (k2 - k1) * (g - 1.0) * e1;
  t[3] = tpc / qr * e1;
  t[4] = -G * d * g * w1 * w1;
  t[5] = (G * k1 - G * d - d * M) * (g - 1.0) * w1;
  const double chi0 = g * e1 + g - 1.0;
  t[6] = 0.5 * B * chi0 * chi0;
  t[7] = G * kgd * e1 * w1;
  t[8] = -d * M * (g - 1.0) * (g - 1.0) / g;
  t[9] = G * hc / qr * w1;
  t[10] = -B * (data.gamma * d + weights_.sigma + kgd * std::exp(nv.phi) + hv / qr) * rcs;
  t[11] = -B * brc;
  t[12] = -B * (kgd * e1 + k1 * (g - 1.0) + hc / qr) * rrc;
  return u;
}

bool in_trapping_region(const LyapunovEvaluator& ev, const State& state, double F, double ratio_bound) {
  const ModelParams& params = ev.params();
  const AgeGrid grid = params.grid(ev.equilibrium().rule);
  const double mass = grid.integrate(state.f);
  return ratio_bound * state.s + mass <= F * (1.0 + 1e-12) && state.s >= trapping_s_lower(params, F);
}

DecayReport decay_check(const LyapunovEvaluator& ev, const State& state, const AssumptionBData& data,
                        const Certificate& cert) {
  const auto& k = cert.constants;
  const auto& wts = ev.weights();
  if (wts.sigma != k.sigma || wts.B != k.B || wts.Gamma != k.Gamma || wts.M != k.M) {
    throw InputError("evaluator weights differ from the certificate constants");
  }
  if (!in_trapping_region(ev, state, k.F, cert.ratio_bound)) {
    throw DomainError("decay inequality not asserted outside trapping region");
  }
  const NormalizedVars nv = ev.normalized_vars(state);
  const double sg = std::sqrt(nv.g);
  DecayReport rep;
  rep.z = {sg * std::expm1(nv.phi), sg * std::expm1(nv.w), (nv.g - 1.0) / sg};
  rep.U = ev.derivative_U(state, data).total();
  rep.zPz = quadratic_form(cert.P, rep.z);
  const double rcs = ev.evaluate(state).rho_chi_sq;
  rep.c_term = k.B * cert.c * rcs;
  rep.slack = rep.U + rep.zPz + rep.c_term;
  rep.unscaled_slack = rep.U + rep.zPz + cert.c * rcs;
  rep.tol = 1e-8 * (1.0 + std::abs(rep.U));
  rep.passed = rep.slack <= rep.tol;
  rep.k0 = cert.k0;
  return rep;
}

}  // namespace agechem
