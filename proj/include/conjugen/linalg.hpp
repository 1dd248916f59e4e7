#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "conjugen/dual.hpp"

namespace conjugen {

/// LU factorization with partial pivoting of a dense complex k x k matrix.
/// Condition is estimated as the ratio of largest to smallest pivot magnitude.
struct LuFactors {
  std::vector<cdouble> lu;  // row-major k x k
  std::vector<int> perm;
  std::size_t k = 0;
  double pivot_ratio = std::numeric_limits<double>::infinity();
  bool singular = true;
};

inline LuFactors lu_factor(std::vector<cdouble> a, std::size_t k) {
  LuFactors f;
  f.lu = std::move(a);
  f.k = k;
  f.perm.resize(k);
  for (std::size_t i = 0; i < k; ++i) f.perm[i] = static_cast<int>(i);

  double max_piv = 0.0;
  double min_piv = std::numeric_limits<double>::infinity();
  auto at = [&](std::size_t r, std::size_t c) -> cdouble& { return f.lu[r * k + c]; };

  for (std::size_t col = 0; col < k; ++col) {
    std::size_t pivot_row = col;
    double best = std::abs(at(col, col));
    for (std::size_t r = col + 1; r < k; ++r) {
      double m = std::abs(at(r, col));
      if (m > best) {
        best = m;
        pivot_row = r;
      }
    }
    if (best == 0.0) {
      f.pivot_ratio = std::numeric_limits<double>::infinity();
      f.singular = true;
      return f;
    }
    if (pivot_row != col) {
      for (std::size_t c = 0; c < k; ++c) std::swap(at(col, c), at(pivot_row, c));
      std::swap(f.perm[col], f.perm[pivot_row]);
    }
    max_piv = std::max(max_piv, best);
    min_piv = std::min(min_piv, best);
    const cdouble piv = at(col, col);
    for (std::size_t r = col + 1; r < k; ++r) {
      cdouble m = at(r, col) / piv;
      at(r, col) = m;
      for (std::size_t c = col + 1; c < k; ++c) at(r, c) -= m * at(col, c);
    }
  }
  f.pivot_ratio = (min_piv > 0.0) ? max_piv / min_piv : std::numeric_limits<double>::infinity();
  f.singular = false;
  return f;
}

inline std::vector<cdouble> lu_solve(const LuFactors& f, std::span<const cdouble> rhs) {
  const std::size_t k = f.k;
  std::vector<cdouble> x(k);
  for (std::size_t i = 0; i < k; ++i) x[i] = rhs[static_cast<std::size_t>(f.perm[i])];
  // forward: L has unit diagonal
  for (std::size_t i = 1; i < k; ++i)
    for (std::size_t j = 0; j < i; ++j) x[i] -= f.lu[i * k + j] * x[j];
  // backward
  for (std::size_t ii = k; ii-- > 0;) {
    for (std::size_t j = ii + 1; j < k; ++j) x[ii] -= f.lu[ii * k + j] * x[j];
    x[ii] /= f.lu[ii * k + ii];
  }
  return x;
}

}  // namespace conjugen
