#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "agechem/certificate.hpp"
#include "agechem/equilibrium.hpp"
#include "agechem/lyapunov.hpp"
#include "agechem/model.hpp"
#include "agechem/simulator.hpp"
#include "json.hpp"

namespace agechem::cli {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

// Config readers. Field names are fixed and unknown fields are rejected
// with an InputError naming the offending path.
GrowthLaw parse_growth_law(const Json& j, const std::string& where = "mu");
AgeFunction parse_age_function(const Json& j, const std::string& where);
ModelParams parse_model(const Json& j);

struct InitialCondition {
  double s0 = 0.0;
  std::optional<AgeFunction> profile;  // either a family ...
  std::vector<double> samples;         // ... or one value per grid node
};
InitialCondition parse_initial(const Json& j);
LyapunovWeights parse_weights(const Json& j);
AssumptionBData parse_assumption_b(const Json& j);
CertificateConstants parse_constants(const Json& j, const std::string& where = "constants");

/// Parses a JSON file; a missing or malformed file is an InputError.
Json read_json_file(const std::filesystem::path& path);

Json to_json(const GrowthLaw& mu);
Json to_json(const AgeFunction& fn);
Json to_json(const ModelParams& params);
Json to_json(const AssumptionBData& data);
Json to_json(const CertificateConstants& k);
Json to_json(const Equilibrium& eq);
Json to_json(const Certificate& cert);

/// Finite values as numbers, otherwise the strings "inf", "-inf", "nan".
Json number(double x);

/// %.17g
std::string format_double(double x);

class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const std::vector<std::string>& header);
  void row(const std::vector<double>& values);

 private:
  std::ostream& out_;
  std::size_t width_;
};

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);
void write_profile_csv(std::ostream& out, const ModelParams& params, const State& state);

/// Numeric CSV with a header row; returns the columns by name order.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;
};
CsvTable read_csv(const std::filesystem::path& path);
double parse_double(const std::string& cell, const std::string& where);

/// Snapshot index written by `simulate --snapshots`: columns t, S, file.
struct SnapshotEntry {
  double t = 0.0;
  double s = 0.0;
  std::filesystem::path file;
};
std::vector<SnapshotEntry> read_snapshot_index(const std::filesystem::path& path);
/// Reads an (a, f) profile and checks it against the model grid.
std::vector<double> read_profile_csv(const std::filesystem::path& path, const ModelParams& params);

}  // namespace agechem::cli
