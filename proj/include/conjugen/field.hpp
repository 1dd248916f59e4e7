#pragma once

#include <array>
#include <cmath>
#include <deque>
#include <optional>
#include <stdexcept>
#include <vector>

#include "conjugen/grid.hpp"
#include "conjugen/nullrep.hpp"
#include "conjugen/parallel.hpp"
#include "conjugen/solver.hpp"

namespace conjugen {

struct DisconnectedCell : std::runtime_error {
  explicit DisconnectedCell(std::size_t cell)
      : std::runtime_error("cell " + std::to_string(cell) + " has no usable field data") {}
};

struct GridTooSmall : std::runtime_error {
  GridTooSmall() : std::runtime_error("verification needs at least 3 grid points per axis") {}
};

/// Solved gradient field with h reconstructed by path integration from a base
/// cell (h = 0 there). Cells the traversal cannot reach keep no h value.
struct FieldGrid {
  GridSpec grid;
  NullRep backend;
  std::vector<SolveStatus> status;          // per cell
  std::vector<std::vector<cdouble>> grad;   // per cell; empty when unsolved
  std::vector<cdouble> h;                   // valid where has_h
  std::vector<char> has_h;
  std::size_t base_cell = 0;
  std::vector<std::size_t> unreachable;     // solved cells the traversal missed

  bool cell_has_grad(std::size_t lin) const { return !grad[lin].empty(); }
};

/// Breadth-first trapezoid integration of grad_h over grid edges. Each edge
/// contributes (grad(a)+grad(b))/2 . dx along its single varying axis.
inline FieldGrid integrate_h(const BranchGrid& branch,
                             std::optional<std::size_t> base = std::nullopt) {
  const GridSpec& grid = branch.grid;
  const std::size_t total = grid.size();
  FieldGrid field{grid, branch.backend, {}, {}, {}, {}, 0, {}};
  field.status.resize(total, SolveStatus::NotAttempted);
  field.grad.resize(total);
  field.h.assign(total, cdouble{});
  field.has_h.assign(total, 0);

  for (std::size_t lin = 0; lin < total; ++lin) {
    const SolveResult& cell = branch.cells[lin];
    field.status[lin] = cell.status;
    if (cell.ok()) field.grad[lin] = gradient_from_phi(branch.backend, cell.phi);
  }

  std::size_t base_cell = total;
  if (base) {
    base_cell = *base;
    if (base_cell >= total || !field.cell_has_grad(base_cell))
      throw DisconnectedCell(base ? *base : 0);
  } else {
    for (std::size_t lin = 0; lin < total; ++lin)
      if (field.cell_has_grad(lin)) {
        base_cell = lin;
        break;
      }
    if (base_cell == total) throw DisconnectedCell(0);
  }
  field.base_cell = base_cell;

  field.h[base_cell] = cdouble{};
  field.has_h[base_cell] = 1;
  std::deque<std::size_t> queue{base_cell};
  const std::size_t nd = grid.dims();
  while (!queue.empty()) {
    std::size_t cur = queue.front();
    queue.pop_front();
    std::vector<int> mi = grid.multi_index(cur);
    for (std::size_t a = 0; a < nd; ++a) {
      for (int dir : {-1, +1}) {
        std::vector<int> nb = mi;
        nb[a] += dir;
        if (!grid.in_range(nb)) continue;
        std::size_t lin = grid.linear_index(nb);
        if (field.has_h[lin] || !field.cell_has_grad(lin)) continue;
        cdouble avg = 0.5 * (field.grad[cur][a] + field.grad[lin][a]);
        field.h[lin] = field.h[cur] + avg * (dir * grid.spacing(a));
        field.has_h[lin] = 1;
        queue.push_back(lin);
      }
    }
  }
  for (std::size_t lin = 0; lin < total; ++lin)
    if (field.cell_has_grad(lin) && !field.has_h[lin]) field.unreachable.push_back(lin);
  return field;
}

namespace detail {

// Ascending trapezoid sum of grad component `axis` between two multi-indices
// differing only along `axis`. Throws if any cell on the edge lacks a gradient.
inline cdouble edge_trapezoid(const FieldGrid& f, std::vector<int> lo, int lo_i, int hi_i,
                              std::size_t axis) {
  cdouble total{};
  lo[axis] = lo_i;
  std::size_t prev = f.grid.linear_index(lo);
  if (!f.cell_has_grad(prev)) throw DisconnectedCell(prev);
  for (int i = lo_i + 1; i <= hi_i; ++i) {
    lo[axis] = i;
    std::size_t cur = f.grid.linear_index(lo);
    if (!f.cell_has_grad(cur)) throw DisconnectedCell(cur);
    total += 0.5 * (f.grad[prev][axis] + f.grad[cur][axis]) * f.grid.spacing(axis);
    prev = cur;
  }
  return total;
}

}  // namespace detail

/// Trapezoid line integral of grad_h around the closed axis-aligned rectangle
/// through the four corner cells (cyclic order). The magnitude is the
/// path-dependence defect; exactly zero for zero-area rectangles.
inline cdouble loop_residual(const FieldGrid& field,
                             const std::array<std::size_t, 4>& corners) {
  const GridSpec& grid = field.grid;
  cdouble total{};
  for (int e = 0; e < 4; ++e) {
    std::vector<int> from = grid.multi_index(corners[static_cast<std::size_t>(e)]);
    std::vector<int> to = grid.multi_index(corners[static_cast<std::size_t>((e + 1) % 4)]);
    std::size_t axis = grid.dims();
    for (std::size_t a = 0; a < grid.dims(); ++a) {
      if (from[a] == to[a]) continue;
      if (axis != grid.dims())
        throw std::invalid_argument("rectangle edge must vary along a single axis");
      axis = a;
    }
    if (axis == grid.dims()) continue;  // zero-length edge
    int lo_i = std::min(from[axis], to[axis]);
    int hi_i = std::max(from[axis], to[axis]);
    cdouble t = detail::edge_trapezoid(field, from, lo_i, hi_i, axis);
    total += (to[axis] > from[axis]) ? t : -t;
  }
  return total;
}

/// Numerical measures of the conjugate-pair conditions over interior cells.
/// The first five fields are the report proper; the rest are diagnostics.
struct ConjugateReport {
  double max_norm_mismatch = 0.0;   // | |grad f| - |grad g| |, central FD of h
  double max_orthogonality = 0.0;   // | grad f . grad g |
  double max_null_residual = 0.0;   // | sum (grad_h)_k^2 | of the solved field
  double max_curl_asymmetry = 0.0;  // | d_a (grad_h)_b - d_b (grad_h)_a |, FD
  double max_loop_residual = 0.0;   // elementary trapezoid loops of the FD gradient
  double max_identity_defect = 0.0; // |(|f'|^2-|g'|^2) + 2i f'.g' - sum (FD grad h)^2|
  double mean_grad_f_sq = 0.0;
  std::size_t interior_cells = 0;
};

inline ConjugateReport verify_conjugate(const FieldGrid& field) {
  const GridSpec& grid = field.grid;
  const std::size_t nd = grid.dims();
  for (const AxisSpec& a : grid.axes)
    if (a.count < 3) throw GridTooSmall();

  const std::size_t total = grid.size();
  std::vector<std::vector<cdouble>> fd(total);
  std::vector<char> has_fd(total, 0);

  const int threads = thread_cap();
  ConjugateReport rep;

  // pass 1: FD gradient of h at interior cells with full stencils
  parallel_for(total, threads, [&](std::size_t lin) {
    std::vector<int> mi = grid.multi_index(lin);
    for (std::size_t a = 0; a < nd; ++a)
      if (mi[a] == 0 || mi[a] == grid.axes[a].count - 1) return;
    std::vector<cdouble> g(nd);
    for (std::size_t a = 0; a < nd; ++a) {
      std::vector<int> p = mi, m = mi;
      ++p[a];
      --m[a];
      std::size_t lp = grid.linear_index(p), lm = grid.linear_index(m);
      if (!field.has_h[lp] || !field.has_h[lm]) return;
      g[a] = (field.h[lp] - field.h[lm]) / (2.0 * grid.spacing(a));
    }
    fd[lin] = std::move(g);
    has_fd[lin] = 1;
  });

  // pass 2: per-cell measures, combined with an order-independent max
  struct Acc {
    double mm = 0, orth = 0, null_r = 0, curl = 0, loop = 0, ident = 0;
  };
  std::vector<Acc> acc(static_cast<std::size_t>(std::max(threads, 1)));
  const std::size_t block = (total + acc.size() - 1) / acc.size();
  parallel_for(acc.size(), threads, [&](std::size_t w) {
    Acc& A = acc[w];
    const std::size_t lo = w * block, hi = std::min(total, lo + block);
    for (std::size_t lin = lo; lin < hi; ++lin) {
      if (field.cell_has_grad(lin))
        A.null_r = std::max(A.null_r, std::abs(null_residual(field.grad[lin])));
      if (!has_fd[lin]) continue;
      const std::vector<cdouble>& g = fd[lin];
      double nf2 = 0, ng2 = 0, dot = 0;
      cdouble fd_null{};
      for (std::size_t a = 0; a < nd; ++a) {
        nf2 += g[a].real() * g[a].real();
        ng2 += g[a].imag() * g[a].imag();
        dot += g[a].real() * g[a].imag();
        fd_null += g[a] * g[a];
      }
      A.mm = std::max(A.mm, std::abs(std::sqrt(nf2) - std::sqrt(ng2)));
      A.orth = std::max(A.orth, std::abs(dot));
      A.ident = std::max(A.ident, std::abs(cdouble{nf2 - ng2, 2.0 * dot} - fd_null));

      std::vector<int> mi = grid.multi_index(lin);
      // curl of the solved gradient field (needs analytic grads around)
      for (std::size_t a = 0; a < nd; ++a)
        for (std::size_t b = a + 1; b < nd; ++b) {
          std::vector<int> ap = mi, am = mi, bp = mi, bm = mi;
          ++ap[a]; --am[a]; ++bp[b]; --bm[b];
          std::size_t lap = grid.linear_index(ap), lam = grid.linear_index(am);
          std::size_t lbp = grid.linear_index(bp), lbm = grid.linear_index(bm);
          if (!field.cell_has_grad(lap) || !field.cell_has_grad(lam) ||
              !field.cell_has_grad(lbp) || !field.cell_has_grad(lbm))
            continue;
          cdouble dab = (field.grad[lap][b] - field.grad[lam][b]) / (2.0 * grid.spacing(a));
          cdouble dba = (field.grad[lbp][a] - field.grad[lbm][a]) / (2.0 * grid.spacing(b));
          A.curl = std::max(A.curl, std::abs(dab - dba));
        }
      // elementary loops of the reconstructed FD gradient
      for (std::size_t a = 0; a < nd; ++a)
        for (std::size_t b = a + 1; b < nd; ++b) {
          std::vector<int> c10 = mi, c01 = mi, c11 = mi;
          ++c10[a];
          ++c01[b];
          ++c11[a]; ++c11[b];
          if (!grid.in_range(c11)) continue;
          std::size_t l10 = grid.linear_index(c10), l01 = grid.linear_index(c01),
                      l11 = grid.linear_index(c11);
          if (!has_fd[l10] || !has_fd[l01] || !has_fd[l11]) continue;
          const double sa = grid.spacing(a), sb = grid.spacing(b);
          cdouble r = 0.5 * (g[a] + fd[l10][a]) * sa + 0.5 * (fd[l10][b] + fd[l11][b]) * sb -
                      0.5 * (fd[l01][a] + fd[l11][a]) * sa - 0.5 * (g[b] + fd[l01][b]) * sb;
          A.loop = std::max(A.loop, std::abs(r));
        }
    }
  });

  for (const Acc& A : acc) {
    rep.max_norm_mismatch = std::max(rep.max_norm_mismatch, A.mm);
    rep.max_orthogonality = std::max(rep.max_orthogonality, A.orth);
    rep.max_null_residual = std::max(rep.max_null_residual, A.null_r);
    rep.max_curl_asymmetry = std::max(rep.max_curl_asymmetry, A.curl);
    rep.max_loop_residual = std::max(rep.max_loop_residual, A.loop);
    rep.max_identity_defect = std::max(rep.max_identity_defect, A.ident);
  }
  // sequential, so the mean does not depend on the thread partition
  double gf2_sum = 0;
  for (std::size_t lin = 0; lin < total; ++lin) {
    if (!has_fd[lin]) continue;
    double nf2 = 0;
    for (std::size_t a = 0; a < nd; ++a) nf2 += fd[lin][a].real() * fd[lin][a].real();
    gf2_sum += nf2;
    ++rep.interior_cells;
  }
  rep.mean_grad_f_sq = rep.interior_cells ? gf2_sum / rep.interior_cells : 0.0;
  return rep;
}

}  // namespace conjugen
