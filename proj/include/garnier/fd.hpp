#pragma once

#include <cmath>
#include <exception>
#include <string>

#include "garnier/error.hpp"
#include "garnier/mat2.hpp"

namespace garnier {

/// Central finite-difference scheme. The effective step at argument z is
/// step * (1 + |z|) when relative_step is set, else step. With richardson the
/// estimates at h and h/2 are combined, lifting the error from O(h^order) to
/// O(h^(order+2)).
struct FDScheme {
  int order = 4;
  double step = 1e-3;
  bool richardson = true;
  bool relative_step = true;

  double step_at(Cx z) const { return relative_step ? step * (1.0 + std::abs(z)) : step; }

  void validate() const {
    if (order != 2 && order != 4) fail(ErrorKind::ConfigInvalid, "fd order must be 2 or 4");
    if (!(step > 0.0) || !std::isfinite(step)) fail(ErrorKind::ConfigInvalid, "fd step must be positive");
  }
};

namespace detail {

inline bool value_finite(Cx v) { return is_finite(v); }
inline bool value_finite(const Mat2& v) { return v.finite(); }

template <class G>
auto guarded(const G& g, double delta) {
  try {
    auto v = g(delta);
    if (!value_finite(v)) {
      fail(ErrorKind::StencilFailure, "non-finite value at stencil offset " + std::to_string(delta));
    }
    return v;
  } catch (const NumericError& e) {
    if (e.kind() == ErrorKind::StencilFailure) throw;
    fail(ErrorKind::StencilFailure,
         "stencil offset " + std::to_string(delta) + ": " + std::string(e.what()));
  }
}

template <class G>
auto first_raw(const G& g, double h, int order) {
  if (order == 2) return (guarded(g, h) - guarded(g, -h)) / (2.0 * h);
  return (8.0 * (guarded(g, h) - guarded(g, -h)) - (guarded(g, 2 * h) - guarded(g, -2 * h))) / (12.0 * h);
}

template <class G>
auto second_raw(const G& g, double h, int order) {
  if (order == 2) return (guarded(g, h) + guarded(g, -h) - 2.0 * guarded(g, 0.0)) / (h * h);
  return (16.0 * (guarded(g, h) + guarded(g, -h)) - (guarded(g, 2 * h) + guarded(g, -2 * h)) -
          30.0 * guarded(g, 0.0)) /
         (12.0 * h * h);
}

template <class Raw>
auto richardson(const Raw& raw, double h, const FDScheme& s) {
  if (!s.richardson) return raw(h);
  const double w = std::pow(2.0, s.order);
  return (w * raw(0.5 * h) - raw(h)) / (w - 1.0);
}

}  // namespace detail

/// d/d(delta) of g at 0, where g maps a real offset to a Cx or Mat2 value and
/// the step h is used as is.
template <class G>
auto fd_offset_derivative(const G& g, double h, const FDScheme& s) {
  s.validate();
  return detail::richardson([&](double hh) { return detail::first_raw(g, hh, s.order); }, h, s);
}

template <class G>
auto fd_offset_second_derivative(const G& g, double h, const FDScheme& s) {
  s.validate();
  return detail::richardson([&](double hh) { return detail::second_raw(g, hh, s.order); }, h, s);
}

/// d^2/(d a d b) of g(a, b) at (0, 0) as a tensor product of first-derivative stencils.
template <class G>
auto fd_offset_mixed(const G& g, double ha, double hb, const FDScheme& s) {
  s.validate();
  auto inner = [&](double a) {
    return detail::richardson(
        [&](double hh) { return detail::first_raw([&](double b) { return g(a, b); }, hh, s.order); }, hb, s);
  };
  return detail::richardson([&](double hh) { return detail::first_raw(inner, hh, s.order); }, ha, s);
}

/// Complex derivative of a holomorphic f at z, sampled along the real axis.
template <class F>
auto fd_derivative(const F& f, Cx z, const FDScheme& s = {}) {
  return fd_offset_derivative([&](double d) { return f(z + d); }, s.step_at(z), s);
}

template <class F>
auto fd_second_derivative(const F& f, Cx z, const FDScheme& s = {}) {
  return fd_offset_second_derivative([&](double d) { return f(z + d); }, s.step_at(z), s);
}

/// d^2 f / (dz dw) for f holomorphic in each argument.
template <class F>
auto fd_mixed_derivative(const F& f, Cx z, Cx w, const FDScheme& s = {}) {
  return fd_offset_mixed([&](double a, double b) { return f(z + a, w + b); }, s.step_at(z), s.step_at(w), s);
}

}  // namespace garnier
