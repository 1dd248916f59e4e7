#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "conjugen/dual.hpp"

namespace conjugen {

/// The two null-vector parametrizations. GeneralQuadratic maps k = n-1 spinor
/// components onto the null cone in C^n (n >= 3); Trilinear5 maps six
/// components onto the null cone in C^5, cubically.
struct NullRep {
  enum class Kind { GeneralQuadratic, Trilinear5 } kind;
  int n;  // real dimension

  static NullRep general_quadratic(int n) {
    if (n < 3) throw std::invalid_argument("general quadratic backend needs n >= 3");
    return {Kind::GeneralQuadratic, n};
  }
  static NullRep trilinear5() { return {Kind::Trilinear5, 5}; }

  int arity() const { return kind == Kind::GeneralQuadratic ? n - 1 : 6; }
  bool operator==(const NullRep&) const = default;
};

struct PhiVector {
  std::vector<cdouble> components;
  NullRep backend;
};

struct RealPoint {
  std::vector<double> coords;
};

struct GradientSample {
  std::vector<cdouble> grad_h;
  PhiVector phi;
  RealPoint point;
};

namespace detail {

inline void check_phi(const NullRep& rep, std::span<const cdouble> phi) {
  if (static_cast<int>(phi.size()) != rep.arity())
    throw std::invalid_argument("phi has " + std::to_string(phi.size()) +
                                " components, backend needs " + std::to_string(rep.arity()));
}

inline void check_point(const NullRep& rep, std::span<const double> x) {
  if (static_cast<int>(x.size()) != rep.n)
    throw std::invalid_argument("point has " + std::to_string(x.size()) +
                                " coordinates, backend needs " + std::to_string(rep.n));
}

}  // namespace detail

/// The n complex components of grad h determined by phi.
inline std::vector<cdouble> gradient_from_phi(const NullRep& rep, std::span<const cdouble> phi) {
  detail::check_phi(rep, phi);
  const cdouble I{0.0, 1.0};
  if (rep.kind == NullRep::Kind::GeneralQuadratic) {
    const int n = rep.n;
    cdouble s{};  // phi_1^2 + ... + phi_{n-2}^2
    for (int j = 0; j + 1 < n - 1; ++j) s += phi[j] * phi[j];
    const cdouble last = phi[n - 2];
    const cdouble q = last * last;
    std::vector<cdouble> g(n);
    g[0] = s - q;
    g[1] = I * (s + q);
    for (int a = 2; a < n; ++a) g[a] = 2.0 * phi[a - 2] * last;
    return g;
  }
  const cdouble p1 = phi[0], p2 = phi[1], p3 = phi[2], p4 = phi[3], p5 = phi[4], p6 = phi[5];
  std::vector<cdouble> g(5);
  g[0] = I * (p1 * p2 + p3 * p4) * p5 - 0.5 * (p1 * p1 + p2 * p2 - p3 * p3 - p4 * p4) * p6;
  g[1] = I * (-p1 * p3 + p2 * p4) * p5 + (p2 * p3 - p1 * p4) * p6;
  g[2] = (-p1 * p2 + p3 * p4) * p5 - 0.5 * I * (p1 * p1 + p2 * p2 + p3 * p3 + p4 * p4) * p6;
  g[3] = (p1 * p3 + p2 * p4) * p5;
  g[4] = (p1 * p3 + p2 * p4) * p6;
  return g;
}

inline std::vector<cdouble> gradient_from_phi(const PhiVector& phi) {
  return gradient_from_phi(phi.backend, phi.components);
}

/// The k functions of (phi, x) whose equality with grad F forms the algebraic
/// system: (X_1..X_{n-1}) for the quadratic backend, (X,Y,Z,T,U,W) for the
/// trilinear one.
inline std::vector<cdouble> x_system(const NullRep& rep, std::span<const cdouble> phi,
                                     std::span<const double> x) {
  detail::check_phi(rep, phi);
  detail::check_point(rep, x);
  const cdouble I{0.0, 1.0};
  if (rep.kind == NullRep::Kind::GeneralQuadratic) {
    const int n = rep.n;
    const cdouble w{x[0], x[1]};        // x1 + i x2
    const cdouble wbar{x[0], -x[1]};    // x1 - i x2
    const cdouble last = phi[n - 2];
    std::vector<cdouble> out(n - 1);
    for (int j = 0; j + 1 < n - 1; ++j) out[j] = phi[j] * w + last * x[j + 2];
    cdouble tail{};
    for (int j = 0; j + 1 < n - 1; ++j) tail += phi[j] * x[j + 2];
    out[n - 2] = -last * wbar + tail;
    return out;
  }
  const cdouble p1 = phi[0], p2 = phi[1], p3 = phi[2], p4 = phi[3], p5 = phi[4], p6 = phi[5];
  const double y = x[1], u = x[4];
  const cdouble wp{x[0], x[2]};   // x + i z
  const cdouble wm{x[0], -x[2]};  // x - i z
  const cdouble tp{x[3], x[1]};   // t + i y
  const cdouble tm{x[3], -x[1]};  // t - i y
  std::vector<cdouble> out(6);
  out[0] = p3 * p5 * tm - (p1 * p6 - I * p2 * p5) * wp - p4 * p6 * y + p3 * p6 * u;
  out[1] = p4 * p5 * tp - (p2 * p6 - I * p1 * p5) * wp + p3 * p6 * y + p4 * p6 * u;
  out[2] = p1 * p5 * tm + (p3 * p6 + I * p4 * p5) * wm + p2 * p6 * y + p1 * p6 * u;
  out[3] = p2 * p5 * tp + (p4 * p6 + I * p3 * p5) * wm - p1 * p6 * y + p2 * p6 * u;
  out[4] = p1 * p3 * tm + p2 * p4 * tp + I * p1 * p2 * wp + I * p3 * p4 * wm;
  out[5] = -0.5 * (p1 * p1 + p2 * p2) * wp + 0.5 * (p3 * p3 + p4 * p4) * wm +
           (p2 * p3 - p1 * p4) * y + (p1 * p3 + p2 * p4) * u;
  return out;
}

/// Exact holomorphic Jacobian dX_i/dphi_j at fixed x (row-major k x k).
/// Constant in phi for the quadratic backend, linear in phi for the trilinear.
inline std::vector<cdouble> x_system_jacobian(const NullRep& rep, std::span<const cdouble> phi,
                                              std::span<const double> x) {
  detail::check_phi(rep, phi);
  detail::check_point(rep, x);
  const cdouble I{0.0, 1.0};
  const std::size_t k = static_cast<std::size_t>(rep.arity());
  std::vector<cdouble> J(k * k, cdouble{});
  auto at = [&](std::size_t r, std::size_t c) -> cdouble& { return J[r * k + c]; };
  if (rep.kind == NullRep::Kind::GeneralQuadratic) {
    const cdouble w{x[0], x[1]};
    const cdouble wbar{x[0], -x[1]};
    for (std::size_t j = 0; j + 1 < k; ++j) {
      at(j, j) = w;
      at(j, k - 1) = x[j + 2];
      at(k - 1, j) = x[j + 2];
    }
    at(k - 1, k - 1) = -wbar;
    return J;
  }
  const cdouble p1 = phi[0], p2 = phi[1], p3 = phi[2], p4 = phi[3], p5 = phi[4], p6 = phi[5];
  const double y = x[1], u = x[4];
  const cdouble wp{x[0], x[2]};
  const cdouble wm{x[0], -x[2]};
  const cdouble tp{x[3], x[1]};
  const cdouble tm{x[3], -x[1]};
  const cdouble c1 = p3 * tm + I * p2 * wp;        // dX/dp5 = dU/dp1
  const cdouble c2 = p4 * tp + I * p1 * wp;        // dY/dp5 = dU/dp2
  const cdouble c3 = p1 * tm + I * p4 * wm;        // dZ/dp5 = dU/dp3
  const cdouble c4 = p2 * tp + I * p3 * wm;        // dT/dp5 = dU/dp4
  const cdouble d1 = -p1 * wp - p4 * y + p3 * u;   // dX/dp6 = dW/dp1
  const cdouble d2 = -p2 * wp + p3 * y + p4 * u;   // dY/dp6 = dW/dp2
  const cdouble d3 = p3 * wm + p2 * y + p1 * u;    // dZ/dp6 = dW/dp3
  const cdouble d4 = p4 * wm - p1 * y + p2 * u;    // dT/dp6 = dW/dp4
  at(0, 0) = -p6 * wp;           at(0, 1) = I * p5 * wp;
  at(0, 2) = p5 * tm + p6 * u;   at(0, 3) = -p6 * y;
  at(0, 4) = c1;                 at(0, 5) = d1;
  at(1, 0) = I * p5 * wp;        at(1, 1) = -p6 * wp;
  at(1, 2) = p6 * y;             at(1, 3) = p5 * tp + p6 * u;
  at(1, 4) = c2;                 at(1, 5) = d2;
  at(2, 0) = p5 * tm + p6 * u;   at(2, 1) = p6 * y;
  at(2, 2) = p6 * wm;            at(2, 3) = I * p5 * wm;
  at(2, 4) = c3;                 at(2, 5) = d3;
  at(3, 0) = -p6 * y;            at(3, 1) = p5 * tp + p6 * u;
  at(3, 2) = I * p5 * wm;        at(3, 3) = p6 * wm;
  at(3, 4) = c4;                 at(3, 5) = d4;
  at(4, 0) = c1;  at(4, 1) = c2;  at(4, 2) = c3;  at(4, 3) = c4;
  at(5, 0) = d1;  at(5, 1) = d2;  at(5, 2) = d3;  at(5, 3) = d4;
  return J;
}

/// sum_k v_k^2 (no conjugation); zero on the null cone.
inline cdouble null_residual(std::span<const cdouble> grad_h) {
  cdouble s{};
  for (const cdouble& v : grad_h) s += v * v;
  return s;
}

}  // namespace conjugen
