#pragma once

#include <array>

namespace agechem {

using Mat3 = std::array<std::array<double, 3>, 3>;
using Vec3 = std::array<double, 3>;

/// Eigenvalues of a symmetric 3x3 matrix in ascending order (closed-form
/// trigonometric solution of the characteristic cubic).
Vec3 symmetric_eigenvalues(const Mat3& m);

/// Leading principal minors d1, d2, d3.
Vec3 leading_minors(const Mat3& m);

/// Sylvester's criterion: all leading principal minors positive.
bool sylvester_positive_definite(const Mat3& m);

double quadratic_form(const Mat3& m, const Vec3& z);

bool is_symmetric(const Mat3& m, double tol = 0.0);

}  // namespace agechem
