#include "agechem/grid.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "agechem/errors.hpp"

namespace agechem {

namespace {

constexpr std::array<double, 5> kGregoryEnds = {95.0 / 288.0, 317.0 / 240.0, 23.0 / 30.0, 793.0 / 720.0,
                                               157.0 / 160.0};
constexpr std::size_t kGregoryMinNodes = 12;

}  // namespace

AgeGrid::AgeGrid(double a_max, std::size_t n, QuadratureRule rule)
    : a_max_(a_max), n_(n), step_(0.0), rule_(rule) {
  if (!(a_max > 0.0) || !std::isfinite(a_max)) throw InputError("a_max must be positive and finite");
  if (n < 2) throw InputError("age grid needs at least two points");
  step_ = a_max / static_cast<double>(n - 1);
}

double AgeGrid::weight(std::size_t i) const {
  const std::size_t from_end = n_ - 1 - i;
  const std::size_t edge = std::min(i, from_end);
  if (rule_ == QuadratureRule::kGregory && n_ >= kGregoryMinNodes) {
    if (edge < kGregoryEnds.size()) return kGregoryEnds[edge] * step_;
    return step_;
  }
  return edge == 0 ? 0.5 * step_ : step_;
}

std::vector<double> AgeGrid::weights() const {
  std::vector<double> w(n_);
  for (std::size_t i = 0; i < n_; ++i) w[i] = weight(i);
  return w;
}

double AgeGrid::integrate(std::span<const double> values) const {
  if (values.size() != n_) throw InputError("sample count does not match the age grid");
  // Interior nodes have unit weight; only the ends differ.
  const std::size_t edge =
      (rule_ == QuadratureRule::kGregory && n_ >= kGregoryMinNodes) ? kGregoryEnds.size() : 1;
  double interior = 0.0;
  for (std::size_t i = edge; i + edge < n_; ++i) interior += values[i];
  double ends = 0.0;
  for (std::size_t i = 0; i < edge; ++i) {
    ends += weight(i) * (values[i] + values[n_ - 1 - i]);
  }
  return interior * step_ + ends;
}

std::vector<double> AgeGrid::sample(const AgeFunction& fn) const {
  std::vector<double> out(n_);
  for (std::size_t i = 0; i < n_; ++i) out[i] = fn.value(age(i));
  return out;
}

}  // namespace agechem
