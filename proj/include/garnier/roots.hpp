#pragma once

#include <array>

#include "garnier/mat2.hpp"

namespace garnier {

/// Both roots of a*z^2 + b*z + c. The larger-magnitude root comes first and is
/// taken from the standard formula with the discriminant sign matched to b; the
/// other is c / (a * r1). Throws DegenerateQuadratic when a == 0.
std::array<Cx, 2> quad_roots(Cx a, Cx b, Cx c);

}  // namespace garnier
