#pragma once

#include <cstddef>
#include <vector>

#include "models.hpp"

namespace agechem::testing {

// Closed moment system of the Toth-Kot model (h = p = 0):
//   K' = (Y mu(S) - D - L - k) K,  Q' = mu(S) K - (D + L) Q,
//   S' = D (S_in - S) - mu(S) Q,
// with K = <k, f>, Q = <q, f> = ||f||_1 and mu(S) = c S.
struct MomentPoint {
  double K = 0.0;
  double Q = 0.0;
  double S = 0.0;
};

inline MomentPoint MomentRhs(const TothKotInputs& in, const MomentPoint& p) {
  const double mu = in.c * p.S;
  return {(in.Y * mu - in.D - in.L - in.k_tilde) * p.K, mu * p.K - (in.D + in.L) * p.Q,
          in.D * (in.s_in - p.S) - mu * p.Q};
}

// Classical RK4 with `substeps` steps per output interval `dt`; returns
// outputs + 1 samples starting at the initial point.
inline std::vector<MomentPoint> IntegrateMoments(const TothKotInputs& in, MomentPoint p, double dt,
                                                 std::size_t outputs, std::size_t substeps = 8) {
  std::vector<MomentPoint> out;
  out.reserve(outputs + 1);
  out.push_back(p);
  const double h = dt / static_cast<double>(substeps);
  auto axpy = [](const MomentPoint& a, double s, const MomentPoint& b) {
    return MomentPoint{a.K + s * b.K, a.Q + s * b.Q, a.S + s * b.S};
  };
  for (std::size_t j = 0; j < outputs; ++j) {
    for (std::size_t m = 0; m < substeps; ++m) {
      const MomentPoint k1 = MomentRhs(in, p);
      const MomentPoint k2 = MomentRhs(in, axpy(p, 0.5 * h, k1));
      const MomentPoint k3 = MomentRhs(in, axpy(p, 0.5 * h, k2));
      const MomentPoint k4 = MomentRhs(in, axpy(p, h, k3));
      p.K += h / 6.0 * (k1.K + 2 * k2.K + 2 * k3.K + k4.K);
      p.Q += h / 6.0 * (k1.Q + 2 * k2.Q + 2 * k3.Q + k4.Q);
      p.S += h / 6.0 * (k1.S + 2 * k2.S + 2 * k3.S + k4.S);
    }
    out.push_back(p);
  }
  return out;
}

}  // namespace agechem::testing
