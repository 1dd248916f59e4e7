#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "conjugen/expr.hpp"
#include "conjugen/nullrep.hpp"
#include "conjugen/parallel.hpp"
#include "conjugen/solver.hpp"

namespace conjugen {

struct UnsupportedDimension : std::runtime_error {
  explicit UnsupportedDimension(int n)
      : std::runtime_error("hypersurface defining functions exist for n in {3,4}, got n=" +
                           std::to_string(n)) {}
};

/// One defining-function value together with the largest monomial magnitude in
/// the defining expression, for scale-normalized reporting.
struct DefiningValue {
  double residual = 0.0;
  double scale = 0.0;

  double normalized() const { return std::abs(residual) / std::max(1.0, scale); }
};

/// Im(F1 conj(phi2) - F2 conj(phi1)) with frozen coefficients F1, F2.
inline DefiningValue m3_defining_value(cdouble f1, cdouble f2, std::span<const cdouble> phi) {
  const cdouble t1 = f1 * std::conj(phi[1]);
  const cdouble t2 = f2 * std::conj(phi[0]);
  return {(t1 - t2).imag(), std::max(std::abs(t1), std::abs(t2))};
}

inline double m3_residual(const HoloExpr& f, std::span<const cdouble> phi) {
  if (f.arity != 2) throw ArityError(0, "M3 needs F of two variables");
  std::vector<cdouble> grad = evaluate_gradient(f, phi);
  return m3_defining_value(grad[0], grad[1], phi).residual;
}

/// The two defining functions of M4, transcribed term for term.
inline std::array<DefiningValue, 2> m4_defining_values(cdouble f1, cdouble f2, cdouble f3,
                                                       std::span<const cdouble> phi) {
  const cdouble p1 = phi[0], p2 = phi[1], p3 = phi[2];
  const cdouble c1 = std::conj(p1), c2 = std::conj(p2), c3 = std::conj(p3);
  const double a1 = std::norm(p1), a2 = std::norm(p2), a3 = std::norm(p3);  // |.|^2

  auto accumulate = [](std::span<const cdouble> terms) {
    cdouble sum{};
    double scale = 0.0;
    for (const cdouble& t : terms) {
      sum += t;
      scale = std::max(scale, std::abs(t));
    }
    return DefiningValue{sum.imag(), scale};
  };

  std::array<DefiningValue, 2> out;
  const std::array<cdouble, 10> first = {
      c3 * f1 * (p2 * p2 * c1 * c1), c3 * f1 * (a2 * a2),
      -c3 * f1 * (a1 * a3),          -c3 * f1 * (a3 * a3),
      -c3 * f2 * (a2 * p1 * c2),     -c3 * f2 * (a1 * p2 * c1),
      -c3 * f2 * (a3 * p2 * c1),     c3 * f3 * p3 * (p1 * c2 * c2),
      c3 * f3 * p3 * (a1 * c1),      c3 * f3 * p3 * (a3 * c1)};
  out[0] = accumulate(first);
  const std::array<cdouble, 10> second = {
      c3 * f1 * (a1 * p2 * c1),      c3 * f1 * (a2 * p1 * c2),
      c3 * f1 * (a3 * p1 * c2),      -c3 * f2 * (p1 * p1 * c2 * c2),
      -c3 * f2 * (a1 * a1),          c3 * f2 * (a2 * a3),
      c3 * f2 * (a3 * a3),           -c3 * f3 * p3 * (p2 * c1 * c1),
      -c3 * f3 * p3 * (a2 * c2),     -c3 * f3 * p3 * (a3 * c2)};
  out[1] = accumulate(second);
  return out;
}

inline std::array<double, 2> m4_residual(const HoloExpr& f, std::span<const cdouble> phi) {
  if (f.arity != 3) throw ArityError(0, "M4 needs F of three variables");
  std::vector<cdouble> grad = evaluate_gradient(f, phi);
  auto v = m4_defining_values(grad[0], grad[1], grad[2], phi);
  return {v[0].residual, v[1].residual};
}

/// Worst defining-function residual over the solved cells of a branch.
struct SurfaceReport {
  std::optional<double> max_abs;         // raw |residual|
  std::optional<double> max_normalized;  // |residual| / max(1, largest monomial)
  std::optional<std::size_t> argmax_cell;
  std::size_t cells_checked = 0;
};

inline SurfaceReport on_surface_check(const BranchGrid& branch, const HoloExpr& f) {
  if (branch.backend.kind != NullRep::Kind::GeneralQuadratic ||
      (branch.backend.n != 3 && branch.backend.n != 4))
    throw UnsupportedDimension(branch.backend.n);
  const bool m3 = branch.backend.n == 3;
  const std::size_t total = branch.cells.size();

  std::vector<double> raw(total, -1.0), scaled(total, -1.0);
  parallel_for(total, thread_cap(), [&](std::size_t lin) {
    const SolveResult& cell = branch.cells[lin];
    if (!cell.ok()) return;
    std::vector<cdouble> grad = evaluate_gradient(f, cell.phi);
    double r = 0.0, s = 0.0;
    if (m3) {
      DefiningValue v = m3_defining_value(grad[0], grad[1], cell.phi);
      r = std::abs(v.residual);
      s = v.normalized();
    } else {
      auto v = m4_defining_values(grad[0], grad[1], grad[2], cell.phi);
      r = std::max(std::abs(v[0].residual), std::abs(v[1].residual));
      s = std::max(v[0].normalized(), v[1].normalized());
    }
    raw[lin] = r;
    scaled[lin] = s;
  });

  SurfaceReport rep;
  for (std::size_t lin = 0; lin < total; ++lin) {
    if (raw[lin] < 0.0) continue;
    ++rep.cells_checked;
    if (!rep.max_abs || raw[lin] > *rep.max_abs) {
      rep.max_abs = raw[lin];
      rep.argmax_cell = lin;
    }
    if (!rep.max_normalized || scaled[lin] > *rep.max_normalized) rep.max_normalized = scaled[lin];
  }
  return rep;
}

}  // namespace conjugen
