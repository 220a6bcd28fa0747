#include "garnier/mat2.hpp"

#include "garnier/roots.hpp"

namespace garnier {

std::array<Cx, 2> Mat2::eigenvalues() const {
  auto r = quad_roots(1.0, -trace(), det());
  if (r[1].real() < r[0].real() || (r[1].real() == r[0].real() && r[1].imag() < r[0].imag())) {
    std::swap(r[0], r[1]);
  }
  return r;
}

std::ostream& operator<<(std::ostream& os, const Mat2& m) {
  return os << "[[" << m.a11 << ", " << m.a12 << "], [" << m.a21 << ", " << m.a22 << "]]";
}

}  // namespace garnier
