#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace agechem::cli {

enum class Command { kEquilibrium, kSimulate, kLyapunov, kCertify, kScan, kTothKot };

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

struct RunConfig {
  Command command = Command::kEquilibrium;
  std::string model_path;
  std::string initial_path;
  std::string weights_path;
  std::string assumption_b_path;
  std::string certificate_path;
  std::string trajectory_path;  // snapshot index for `lyapunov`
  std::string out;              // directory for `simulate`, file otherwise (stdout if empty)
  std::string scheme;           // "accurate" | "consistent"; empty picks the command default

  std::optional<double> horizon;
  std::optional<double> dt;
  std::optional<std::size_t> stride;  // 1 for simulate, 10 for tothkot
  bool assert_bounds = false;
  bool snapshots = false;

  bool recipe = false;
  bool search = false;
  std::int64_t budget = 2000;
  std::uint64_t seed = 1;
  std::optional<double> F;

  // scan and tothkot
  double Y = 2.0;
  double k_tilde = 2.0;
  double L = 1.0;
  double D = 0.2;
  double s_in = 2.0;
  double mu_rate = 1.0;
  std::size_t n_age = 4001;
  std::optional<double> d_min;
  std::optional<double> d_max;
  std::size_t points = 50;
};

/// Executes one command. Diagnostics go to `err`; the exit status is 0 on
/// success, 1 on a domain failure and 2 on a usage or input error.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Parses the command line into a RunConfig and runs it.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace agechem::cli
