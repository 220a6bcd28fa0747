#include "garnier/roots.hpp"

#include "garnier/error.hpp"

namespace garnier {

std::array<Cx, 2> quad_roots(Cx a, Cx b, Cx c) {
  if (a == Cx(0.0)) fail(ErrorKind::DegenerateQuadratic, "leading coefficient is zero");
  Cx sq = std::sqrt(b * b - 4.0 * a * c);
  // Pick the sign that avoids cancellation in -b -/+ sq.
  if ((std::conj(b) * sq).real() < 0.0) sq = -sq;
  const Cx q = -0.5 * (b + sq);
  if (q == Cx(0.0)) return {Cx(0.0), Cx(0.0)};
  const Cx r1 = q / a;
  return {r1, c / q};
}

}  // namespace garnier
