#include "agechem_cli/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "agechem/errors.hpp"

namespace agechem::cli {

namespace {

// Tracks which keys of an object were read so leftovers can be rejected.
class Fields {
 public:
  Fields(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw InputError(where_ + ": expected a JSON object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const Json& at(const std::string& key) {
    if (!j_.contains(key)) throw InputError(where_ + ": missing field '" + key + "'");
    seen_.insert(key);
    return j_.at(key);
  }

  double num(const std::string& key) {
    const Json& v = at(key);
    if (!v.is_number()) throw InputError(path(key) + ": expected a number");
    return v.get<double>();
  }

  double num_or(const std::string& key, double fallback) { return has(key) ? num(key) : fallback; }

  std::string str(const std::string& key) {
    const Json& v = at(key);
    if (!v.is_string()) throw InputError(path(key) + ": expected a string");
    return v.get<std::string>();
  }

  std::vector<double> nums(const std::string& key) {
    const Json& v = at(key);
    if (!v.is_array()) throw InputError(path(key) + ": expected an array of numbers");
    std::vector<double> out;
    out.reserve(v.size());
    for (const Json& e : v) {
      if (!e.is_number()) throw InputError(path(key) + ": expected an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::string path(const std::string& key) const { return where_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw InputError(where_ + ": unknown field '" + it.key() + "'");
    }
  }

 private:
  const Json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

GrowthLaw parse_growth_law(const Json& j, const std::string& where) {
  Fields f(j, where);
  const std::string family = f.str("family");
  GrowthLaw mu = GrowthLaw::Linear(1.0);
  if (family == "linear") {
    mu = GrowthLaw::Linear(f.num("c"));
  } else if (family == "monod") {
    mu = GrowthLaw::Monod(f.num("m"), f.num("a_half"));
  } else {
    throw InputError(f.path("family") + ": unknown growth law '" + family + "' (linear, monod)");
  }
  f.finish();
  return mu;
}

AgeFunction parse_age_function(const Json& j, const std::string& where) {
  Fields f(j, where);
  const std::string family = f.str("family");
  AgeFunction fn;
  if (family == "constant") {
    fn = AgeFunction::MakeConstant(f.num("value"));
  } else if (family == "exp_decay") {
    fn = AgeFunction::MakeExpDecay(f.num("amplitude"), f.num("rate"));
  } else if (family == "tabulated") {
    fn = AgeFunction::MakeTabulated(f.nums("ages"), f.nums("values"));
  } else {
    throw InputError(f.path("family") + ": unknown family '" + family + "' (constant, exp_decay, tabulated)");
  }
  f.finish();
  return fn;
}

ModelParams parse_model(const Json& j) {
  Fields f(j, "model");
  GrowthLaw mu = parse_growth_law(f.at("mu"), "model.mu");
  AgeFunction beta = parse_age_function(f.at("beta"), "model.beta");
  AgeFunction k = parse_age_function(f.at("k"), "model.k");
  AgeFunction q = parse_age_function(f.at("q"), "model.q");
  const double s_in = f.num("S_in");
  const double d = f.num("D");
  const double a_max = f.num_or("a_max", ModelParams::default_a_max(d, beta.infimum()));
  std::size_t n_age = 4001;
  if (f.has("n_age")) {
    const Json& n = f.at("n_age");
    if (!n.is_number_integer() || n.get<long long>() < 3) {
      throw InputError("model.n_age: expected an integer >= 3");
    }
    n_age = n.get<std::size_t>();
  }
  f.finish();
  return ModelParams(mu, beta, k, q, s_in, d, a_max, n_age);
}

InitialCondition parse_initial(const Json& j) {
  Fields f(j, "initial");
  InitialCondition ic;
  ic.s0 = f.num("S0");
  const bool has_profile = f.has("profile");
  const bool has_samples = f.has("samples");
  if (has_profile == has_samples) throw InputError("initial: give exactly one of 'profile' or 'samples'");
  if (has_profile) {
    ic.profile = parse_age_function(f.at("profile"), "initial.profile");
  } else {
    ic.samples = f.nums("samples");
  }
  f.finish();
  return ic;
}

LyapunovWeights parse_weights(const Json& j) {
  Fields f(j, "weights");
  LyapunovWeights w;
  w.sigma = f.num_or("sigma", w.sigma);
  w.B = f.num_or("B", w.B);
  w.Gamma = f.num_or("Gamma", w.Gamma);
  w.M = f.num_or("M", w.M);
  f.finish();
  return w;
}

AssumptionBData parse_assumption_b(const Json& j) {
  Fields f(j, "assumption_b");
  AssumptionBData d;
  d.b = f.num("b");
  d.gamma = f.num("gamma");
  d.theta = f.num("theta");
  d.alpha = f.num("alpha");
  d.delta = f.num("delta");
  if (f.has("h")) d.h = parse_age_function(f.at("h"), "assumption_b.h");
  if (f.has("p")) d.p = parse_age_function(f.at("p"), "assumption_b.p");
  d.ratio_bound = f.num("R");
  f.finish();
  return d;
}

CertificateConstants parse_constants(const Json& j, const std::string& where) {
  Fields f(j, where);
  CertificateConstants k;
  k.sigma = f.num("sigma");
  k.epsilon = f.num("epsilon");
  k.omega = f.num("omega");
  k.lambda = f.num("lambda");
  k.R1 = f.num("R1");
  k.R2 = f.num("R2");
  k.R3 = f.num("R3");
  k.B = f.num("B");
  k.Gamma = f.num("Gamma");
  k.M = f.num("M");
  k.F = f.num("F");
  f.finish();
  return k;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

Json number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Json to_json(const GrowthLaw& mu) {
  if (mu.family() == GrowthLaw::Family::kLinear) return {{"family", "linear"}, {"c", mu.rate()}};
  return {{"family", "monod"}, {"m", mu.rate()}, {"a_half", mu.half_saturation()}};
}

Json to_json(const AgeFunction& fn) {
  return std::visit(
      [](const auto& form) -> Json {
        using T = std::decay_t<decltype(form)>;
        if constexpr (std::is_same_v<T, AgeFunction::Constant>) {
          return {{"family", "constant"}, {"value", form.value}};
        } else if constexpr (std::is_same_v<T, AgeFunction::ExpDecay>) {
          return {{"family", "exp_decay"}, {"amplitude", form.amplitude}, {"rate", form.rate}};
        } else {
          return {{"family", "tabulated"}, {"ages", form.ages}, {"values", form.values}};
        }
      },
      fn.form());
}

Json to_json(const ModelParams& p) {
  return {{"mu", to_json(p.mu())},   {"beta", to_json(p.beta())}, {"k", to_json(p.k())},
          {"q", to_json(p.q())},     {"S_in", p.s_in()},          {"D", p.dilution()},
          {"a_max", p.a_max()},      {"n_age", p.n_age()}};
}

Json to_json(const AssumptionBData& d) {
  return {{"b", d.b},         {"gamma", d.gamma},   {"theta", d.theta}, {"alpha", d.alpha},
          {"delta", d.delta}, {"h", to_json(d.h)}, {"p", to_json(d.p)}, {"R", d.ratio_bound}};
}

Json to_json(const CertificateConstants& k) {
  return {{"sigma", k.sigma}, {"epsilon", k.epsilon}, {"omega", k.omega}, {"lambda", k.lambda},
          {"R1", k.R1},       {"R2", k.R2},           {"R3", k.R3},       {"B", k.B},
          {"Gamma", k.Gamma}, {"M", k.M},             {"F", number(k.F)}};
}

Json to_json(const Equilibrium& eq) {
  return {{"scheme", eq.scheme == EquilibriumScheme::kAccurate ? "accurate" : "consistent"},
          {"S_star", eq.s_star},
          {"f_star0", eq.f_star0},
          {"mu_star", eq.mu_star},
          {"kr", eq.kr},
          {"qr", eq.qr},
          {"theta", eq.theta},
          {"kappa1", eq.kappa1},
          {"kappa2", eq.kappa2},
          {"r_norm1", eq.r_norm1}};
}

Json to_json(const Certificate& cert) {
  const ConditionReport& r = cert.report;
  Json p = Json::array();
  for (const auto& row : cert.P) p.push_back({number(row[0]), number(row[1]), number(row[2])});
  return {
      {"constants", to_json(cert.constants)},
      {"ratio_bound", cert.ratio_bound},
      {"derived",
       {{"S_lower", number(cert.s_lower)},
        {"g_lower", number(cert.g_lower)},
        {"g_upper", number(cert.g_upper)},
        {"A", number(cert.A)},
        {"G1", number(cert.G1)},
        {"G2", number(cert.G2)},
        {"G3", number(cert.G3)},
        {"G4", number(cert.G4)},
        {"c", number(cert.c)},
        {"k0", number(cert.k0)},
        {"norm_rho_inv_h", number(cert.norms.rho_inv_h)},
        {"norm_rho_inv_theta_p_minus_h", number(cert.norms.rho_inv_theta_p_minus_h)},
        {"norm_rho_r", number(cert.norms.rho_r)}}},
      {"P", p},
      {"lambda_min", number(r.lambda_min)},
      {"margins",
       {{"cond_3_20", number(r.margin_3_20)},
        {"cond_3_21", number(r.margin_3_21)},
        {"cond_3_22", number(r.margin_3_22)},
        {"cond_3_23", number(r.margin_3_23)},
        {"normalized", number(r.normalized_margin)}}},
      {"holds",
       {{"cond_3_20", r.holds_3_20},
        {"cond_3_21", r.holds_3_21},
        {"cond_3_22", r.holds_3_22},
        {"cond_3_23", r.holds_3_23},
        {"cond_3_24", to_string(r.pd)},
        {"sylvester_pd", r.sylvester_pd}}},
      {"overall", r.overall},
  };
}

CsvWriter::CsvWriter(std::ostream& out, const std::vector<std::string>& header)
    : out_(out), width_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != width_) throw InputError("CSV row width does not match the header");
  for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_double(values[i]);
  out_ << '\n';
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
  CsvWriter csv(out, {"t", "S", "mass", "kf", "qf", "x"});
  for (const StepRecord& r : trajectory.records) csv.row({r.t, r.s, r.mass, r.kf, r.qf, r.x});
}

void write_profile_csv(std::ostream& out, const ModelParams& params, const State& state) {
  const AgeGrid grid = params.grid();
  CsvWriter csv(out, {"a", "f"});
  for (std::size_t i = 0; i < state.f.size(); ++i) csv.row({grid.age(i), state.f[i]});
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw InputError("CSV column '" + name + "' not found");
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw InputError(path.string() + ": empty CSV");
  table.header = SplitCsvLine(line);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cells = SplitCsvLine(line);
    if (cells.size() != table.header.size()) {
      throw InputError(path.string() + ":" + std::to_string(lineno) + ": wrong number of columns");
    }
    table.rows.push_back(std::move(cells));
  }
  return table;
}

double parse_double(const std::string& cell, const std::string& where) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != cell.size()) throw InputError(where + ": not a number: '" + cell + "'");
  return v;
}

std::vector<SnapshotEntry> read_snapshot_index(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  const std::size_t ct = table.column("t");
  const std::size_t cs = table.column("S");
  const std::size_t cf = table.column("file");
  std::vector<SnapshotEntry> out;
  for (const auto& row : table.rows) {
    SnapshotEntry e;
    e.t = parse_double(row[ct], path.string());
    e.s = parse_double(row[cs], path.string());
    e.file = path.parent_path() / row[cf];
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<double> read_profile_csv(const std::filesystem::path& path, const ModelParams& params) {
  const CsvTable table = read_csv(path);
  const std::size_t ca = table.column("a");
  const std::size_t cf = table.column("f");
  if (table.rows.size() != params.n_age()) throw InputError(path.string() + ": profile does not match n_age");
  const AgeGrid grid = params.grid();
  std::vector<double> f;
  f.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const double a = parse_double(table.rows[i][ca], path.string());
    if (std::abs(a - grid.age(i)) > 1e-9 * (1.0 + params.a_max())) {
      throw InputError(path.string() + ": ages do not match the model grid");
    }
    f.push_back(parse_double(table.rows[i][cf], path.string()));
  }
  return f;
}

}  // namespace agechem::cli
