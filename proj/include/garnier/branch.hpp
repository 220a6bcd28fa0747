#pragma once

#include "garnier/mat2.hpp"

namespace garnier {

/// Logarithm of z continued from a reference point where log(ref_z) = ref_log.
/// Valid as long as z/ref_z stays off the negative real axis, i.e. the two
/// points are close compared to their distance from the branch point.
inline Cx log_continue(Cx z, Cx ref_z, Cx ref_log) { return ref_log + std::log(z / ref_z); }

/// z^p for a log value already tracked along a path.
inline Cx pow_from_log(Cx log_z, Cx p) { return std::exp(p * log_z); }

}  // namespace garnier
