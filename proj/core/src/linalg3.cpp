#include "agechem/linalg3.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace agechem {

Vec3 symmetric_eigenvalues(const Mat3& m) {
  const double off = m[0][1] * m[0][1] + m[0][2] * m[0][2] + m[1][2] * m[1][2];
  if (off == 0.0) {
    Vec3 d{m[0][0], m[1][1], m[2][2]};
    std::sort(d.begin(), d.end());
    return d;
  }
  const double mean = (m[0][0] + m[1][1] + m[2][2]) / 3.0;
  const double a0 = m[0][0] - mean;
  const double a1 = m[1][1] - mean;
  const double a2 = m[2][2] - mean;
  const double p = std::sqrt((a0 * a0 + a1 * a1 + a2 * a2 + 2.0 * off) / 6.0);
  // det((m - mean I) / p) / 2, the cosine of three times the angle.
  const double b01 = m[0][1] / p, b02 = m[0][2] / p, b12 = m[1][2] / p;
  const double b0 = a0 / p, b1 = a1 / p, b2 = a2 / p;
  const double det = b0 * (b1 * b2 - b12 * b12) - b01 * (b01 * b2 - b12 * b02) + b02 * (b01 * b12 - b1 * b02);
  const double angle = std::acos(std::clamp(0.5 * det, -1.0, 1.0)) / 3.0;
  const double largest = mean + 2.0 * p * std::cos(angle);
  const double smallest = mean + 2.0 * p * std::cos(angle + 2.0 * std::numbers::pi / 3.0);
  const double middle = 3.0 * mean - largest - smallest;
  return {smallest, middle, largest};
}

Vec3 leading_minors(const Mat3& m) {
  const double d1 = m[0][0];
  const double d2 = m[0][0] * m[1][1] - m[0][1] * m[1][0];
  const double d3 = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                    m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                    m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  return {d1, d2, d3};
}

bool sylvester_positive_definite(const Mat3& m) {
  const Vec3 d = leading_minors(m);
  return d[0] > 0.0 && d[1] > 0.0 && d[2] > 0.0;
}

double quadratic_form(const Mat3& m, const Vec3& z) {
  double s = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) s += z[i] * m[i][j] * z[j];
  }
  return s;
}

bool is_symmetric(const Mat3& m, double tol) {
  return std::abs(m[0][1] - m[1][0]) <= tol && std::abs(m[0][2] - m[2][0]) <= tol &&
         std::abs(m[1][2] - m[2][1]) <= tol;
}

}  // namespace agechem
