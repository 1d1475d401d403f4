#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace biofet {

namespace detail {

// Gauss-Kronrod 7-15 node pair on [-1, 1].
inline constexpr double gk_nodes[15] = {
    -0.991455371120812639206854697526329,
    -0.949107912342758524526189684047851,
    -0.864864423359769072789712788640926,
    -0.741531185599394439863864773280788,
    -0.586087235467691130294144838258730,
    -0.405845151377397166906606412076961,
    -0.207784955007898467600689403773245,
    0.0,
    0.207784955007898467600689403773245,
    0.405845151377397166906606412076961,
    0.586087235467691130294144838258730,
    0.741531185599394439863864773280788,
    0.864864423359769072789712788640926,
    0.949107912342758524526189684047851,
    0.991455371120812639206854697526329};

inline constexpr double gk_weights[15] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
    0.204432940075298892414161999234649,
    0.190350578064785409913256402421014,
    0.169004726639267902826583426598550,
    0.140653259715525918745189590510238,
    0.104790010322250183839876322541518,
    0.063092092629978553290700663189204,
    0.022935322010529224963732008058970};

// Embedded 7-point Gauss weights (nonzero at odd Kronrod indices).
inline constexpr double g7_weights[7] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
    0.381830050505118944950369775488975,
    0.279705391489276667901467771423780,
    0.129484966168869693270611432679082};

template <typename F>
void gk15(const F& f, double a, double b, double& value, double& error) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double k = 0.0, g = 0.0;
  for (int i = 0; i < 15; ++i) {
    const double y = f(mid + half * gk_nodes[i]);
    k += gk_weights[i] * y;
    if (i % 2 == 1) g += g7_weights[i / 2] * y;
  }
  value = k * half;
  error = std::abs((k - g) * half);
}

template <typename F>
double adapt(const F& f, double a, double b, double tol_abs, int depth,
             int max_depth) {
  double v, e;
  gk15(f, a, b, v, e);
  if (e <= tol_abs || depth >= max_depth) {
    if (depth >= max_depth && e > tol_abs)
      throw std::runtime_error(
          "adaptive quadrature failed to converge on [" + std::to_string(a) +
          ", " + std::to_string(b) + "] (error " + std::to_string(e) + ")");
    return v;
  }
  const double mid = 0.5 * (a + b);
  return adapt(f, a, mid, 0.5 * tol_abs, depth + 1, max_depth) +
         adapt(f, mid, b, 0.5 * tol_abs, depth + 1, max_depth);
}

} // namespace detail

// Adaptive Gauss-Kronrod integration of f over [a, b] to a relative
// tolerance. The absolute budget is set from a first whole-interval pass.
template <typename F>
double integrate(const F& f, double a, double b, double rel_tol = 1e-9,
                 int max_depth = 40) {
  if (!(b > a)) return 0.0;
  double v, e;
  detail::gk15(f, a, b, v, e);
  const double tol_abs = rel_tol * std::max(std::abs(v), 1e-300);
  if (e <= tol_abs) return v;
  const double mid = 0.5 * (a + b);
  return detail::adapt(f, a, mid, 0.5 * tol_abs, 1, max_depth) +
         detail::adapt(f, mid, b, 0.5 * tol_abs, 1, max_depth);
}

// Fixed-step composite trapezoid. Deliberately simple; used as the dumb
// second route when cross-checking the adaptive scheme.
template <typename F>
double trapezoid(const F& f, double a, double b, std::size_t n) {
  const double h = (b - a) / static_cast<double>(n);
  double acc = 0.5 * (f(a) + f(b));
  for (std::size_t i = 1; i < n; ++i) acc += f(a + h * static_cast<double>(i));
  return acc * h;
}

} // namespace biofet
