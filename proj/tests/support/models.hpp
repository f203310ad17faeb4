#pragma once

#include <cstddef>

#include "agechem/model.hpp"

namespace agechem::testing {

struct TothKotInputs {
  double Y = 2.0;
  double D = 1.0;
  double L = 0.5;
  double k_tilde = 0.5;
  double s_in = 2.0;
  double c = 1.0;  // linear growth slope
};

// beta = L, q = 1, k = Y exp(-k_tilde a), mu(S) = c S, a_max = 40/(D+L).
inline ModelParams TothKotParams(const TothKotInputs& in, std::size_t n_age = 4001) {
  return ModelParams(GrowthLaw::Linear(in.c), AgeFunction::MakeConstant(in.L),
                     AgeFunction::MakeExpDecay(in.Y, in.k_tilde), AgeFunction::MakeConstant(1.0), in.s_in,
                     in.D, ModelParams::default_a_max(in.D, in.L), n_age);
}

// Same model with the age step fixed instead of the node count.
inline ModelParams TothKotParamsWithStep(const TothKotInputs& in, double step) {
  return TothKotParams(in, 2).with_step(step);
}

}  // namespace agechem::testing
