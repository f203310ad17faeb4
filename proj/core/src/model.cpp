#include "agechem/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "agechem/errors.hpp"

namespace agechem {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kSubstrateSamples = 2001;

CheckItem Check(std::string name, bool passed, double witness, std::string detail = {}) {
  return CheckItem{std::move(name), passed, witness, std::move(detail)};
}

}  // namespace

ModelParams::ModelParams(GrowthLaw mu, AgeFunction beta, AgeFunction k, AgeFunction q, double s_in,
                         double dilution, double a_max, std::size_t n_age)
    : mu_(std::move(mu)),
      beta_(std::move(beta)),
      k_(std::move(k)),
      q_(std::move(q)),
      s_in_(s_in),
      dilution_(dilution),
      a_max_(a_max),
      n_age_(n_age),
      min_mortality_(0.0),
      growth_lipschitz_(0.0) {
  if (!(s_in > 0.0) || !std::isfinite(s_in)) throw InputError("S_in must be positive");
  if (!(dilution > 0.0) || !std::isfinite(dilution)) throw InputError("D must be positive");
  if (!(a_max > 0.0) || !std::isfinite(a_max)) throw InputError("a_max must be positive");
  if (n_age < 2) throw InputError("n_age must be at least 2");
  min_mortality_ = beta_.infimum();
  growth_lipschitz_ = mu_.lipschitz(s_in_);
}

ModelParams ModelParams::with_step(double step) const {
  if (!(step > 0.0)) throw InputError("age step must be positive");
  const auto intervals = static_cast<std::size_t>(std::ceil(a_max_ / step - 1e-9));
  return with_grid(step * static_cast<double>(intervals), intervals + 1);
}

ModelParams ModelParams::with_grid(double a_max, std::size_t n_age) const {
  return ModelParams(mu_, beta_, k_, q_, s_in_, dilution_, a_max, n_age);
}

double ModelParams::default_a_max(double dilution, double min_mortality) {
  return 40.0 / (dilution + std::max(0.0, min_mortality));
}

bool ValidationReport::all_passed() const {
  return std::all_of(items.begin(), items.end(), [](const CheckItem& c) { return c.passed; });
}

const CheckItem* ValidationReport::find(const std::string& name) const {
  for (const auto& item : items) {
    if (item.name == name) return &item;
  }
  return nullptr;
}

ValidationReport validate_model(const ModelParams& params) {
  ValidationReport report;
  auto& items = report.items;
  const GrowthLaw& mu = params.mu();
  const double s_in = params.s_in();

  items.push_back(Check("mu(0) = 0", mu.value(0.0) == 0.0, mu.value(0.0)));

  double min_mu = kInf;
  double min_mu_at = 0.0;
  double min_slope = kInf;
  double min_slope_at = 0.0;
  for (std::size_t i = 0; i < kSubstrateSamples; ++i) {
    const double s = s_in * static_cast<double>(i) / static_cast<double>(kSubstrateSamples - 1);
    const double slope = mu.derivative(s);
    if (slope < min_slope) {
      min_slope = slope;
      min_slope_at = s;
    }
    if (i > 0) {
      const double v = mu.value(s);
      if (v < min_mu) {
        min_mu = v;
        min_mu_at = s;
      }
    }
  }
  {
    std::ostringstream os;
    os << "min mu on (0, S_in] at S=" << min_mu_at;
    items.push_back(Check("mu positive", min_mu > 0.0, min_mu, os.str()));
  }
  {
    std::ostringstream os;
    os << "min mu' on [0, S_in] at S=" << min_slope_at;
    items.push_back(Check("mu increasing", min_slope >= 0.0, min_slope, os.str()));
  }

  const struct {
    const char* label;
    const AgeFunction* fn;
  } age_functions[] = {{"beta", &params.beta()}, {"k", &params.k()}, {"q", &params.q()}};

  for (const auto& [label, fn] : age_functions) {
    const double inf = fn->infimum();
    items.push_back(Check(std::string(label) + " non-negative", inf >= 0.0, inf));
    const double sup = fn->sup_norm();
    items.push_back(Check(std::string(label) + " bounded", std::isfinite(sup), sup));
  }
  for (const auto& [label, fn] : {std::pair{"k", &params.k()}, std::pair{"q", &params.q()}}) {
    const double dsup = fn->derivative_sup_norm();
    items.push_back(Check(std::string(label) + " derivative bounded", std::isfinite(dsup), dsup));
    const double total = fn->integral(0.0, kInf);
    items.push_back(Check(std::string("integral ") + label + " > 0", total > 0.0, total));
  }
  return report;
}

RatioBoundReport verify_assumption_A(const ModelParams& params, double ratio_bound) {
  if (!(ratio_bound > 0.0)) throw InputError("ratio bound R must be positive");
  RatioBoundReport out;
  out.holds = true;
  const AgeFunction& k = params.k();
  const AgeFunction& q = params.q();
  const AgeGrid grid = params.grid();
  constexpr double kRelTol = 1e-9;

  auto visit_age = [&](double a) {
    const double kv = k.value(a);
    const double qv = q.value(a);
    if (kv <= 0.0) return;
    if (qv <= 0.0) {
      out.no_finite_bound = true;
      out.holds = false;
      out.worst_ratio = kInf;
      out.worst_age = a;
      return;
    }
    const double ratio = kv / qv;
    if (ratio > out.worst_ratio) {
      out.worst_ratio = ratio;
      out.worst_age = a;
    }
    if (kv > ratio_bound * qv * (1.0 + kRelTol)) out.holds = false;
  };

  for (std::size_t i = 0; i < grid.size() && !out.no_finite_bound; ++i) visit_age(grid.age(i));
  for (const auto* fn : {&k, &q}) {
    if (const auto* t = std::get_if<AgeFunction::Tabulated>(&fn->form())) {
      for (double a : t->ages) {
        if (a > params.a_max() && !out.no_finite_bound) visit_age(a);
      }
    }
  }

  // Beyond the grid: a single exponential on each side decides the tail.
  const double tail_start = std::max(params.a_max(), 0.0);
  const auto kt = k.tail_form(tail_start);
  const auto qt = q.tail_form(tail_start);
  if (!out.no_finite_bound && kt && qt && kt->coef > 0.0) {
    if (qt->coef <= 0.0) {
      out.no_finite_bound = true;
      out.holds = false;
      out.worst_ratio = kInf;
      out.worst_age = kInf;
    } else if (kt->rate < qt->rate) {
      out.holds = false;
      out.worst_ratio = kInf;
      out.worst_age = kInf;
    }
  }

  std::ostringstream os;
  if (out.no_finite_bound) {
    os << "no finite R exists: q vanishes where k > 0 (a=" << out.worst_age << ")";
  } else if (out.holds) {
    os << "k <= R q holds; max k/q = " << out.worst_ratio << " at a=" << out.worst_age;
  } else {
    os << "k <= R q violated; max k/q = " << out.worst_ratio << " at a=" << out.worst_age;
  }
  out.message = os.str();
  return out;
}

ResidualReport verify_assumption_B(const ModelParams& params, const AssumptionBData& data, double tol) {
  if (!(tol > 0.0)) throw InputError("tolerance must be positive");
  ResidualReport out;
  out.min_h = kInf;
  out.min_p = kInf;
  const double dilution = params.dilution();
  const AgeFunction& beta = params.beta();
  const AgeFunction& k = params.k();
  const AgeFunction& q = params.q();
  const AgeGrid grid = params.grid();

  bool mismatch = false;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double a = grid.age(i);
    const double bv = beta.value(a);
    const double kv = k.value(a);
    const double qv = q.value(a);
    const double h = q.derivative(a) - bv * qv - data.gamma * dilution * qv - data.delta * data.theta * kv;
    const double p = k.derivative(a) - bv * kv - (data.alpha / data.theta) * qv - data.b * dilution * kv;
    const double dh = std::abs(data.h.value(a) - h);
    const double dp = std::abs(data.p.value(a) - p);
    if (dh > out.max_h_mismatch) out.max_h_mismatch = dh;
    if (dp > out.max_p_mismatch) out.max_p_mismatch = dp;
    if (dh > tol * (1.0 + std::abs(h)) || dp > tol * (1.0 + std::abs(p))) mismatch = true;
    if (h < out.min_h) {
      out.min_h = h;
      out.h_worst_age = a;
    }
    if (p < out.min_p) {
      out.min_p = p;
      out.p_worst_age = a;
    }
  }

  if (!(data.theta > 0.0)) out.failures.push_back("theta must be positive");
  if (data.alpha < 0.0 || data.delta < 0.0) out.failures.push_back("alpha and delta must be non-negative");
  if (mismatch) {
    std::ostringstream os;
    os << "stated h, p do not match the computed residuals (max mismatch h=" << out.max_h_mismatch
       << ", p=" << out.max_p_mismatch << ")";
    out.failures.push_back(os.str());
  }
  if (out.min_h < -tol || out.min_p < -tol) {
    std::ostringstream os;
    os << "h or p not non-negative: assumption (B) violated (min h=" << out.min_h << " at a=" << out.h_worst_age
       << ", min p=" << out.min_p << " at a=" << out.p_worst_age << ")";
    out.failures.push_back(os.str());
  }
  out.b_at_most_one = data.b <= 1.0;
  out.gamma_at_most_one = data.gamma <= 1.0;
  if (!out.b_at_most_one || !out.gamma_at_most_one) out.failures.push_back("b and gamma must not exceed 1");
  out.passed = out.failures.empty();
  return out;
}

}  // namespace agechem
