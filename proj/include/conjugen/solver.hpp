#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "conjugen/expr.hpp"
#include "conjugen/grid.hpp"
#include "conjugen/linalg.hpp"
#include "conjugen/nullrep.hpp"

namespace conjugen {

struct SolveConfig {
  double tol_residual = 1e-12;
  int max_iters = 50;
  int max_halvings = 20;
  std::optional<std::vector<cdouble>> seed_phi;
  int seed_retries = 8;
  std::uint64_t rng_seed = 0xC0FFEE;
  double singular_condition = 1e14;
};

enum class SolveStatus { Ok, SingularJacobian, NoConvergence, EvalDomain, NotAttempted };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Ok: return "ok";
    case SolveStatus::SingularJacobian: return "singular_jacobian";
    case SolveStatus::NoConvergence: return "no_convergence";
    case SolveStatus::EvalDomain: return "eval_domain";
    case SolveStatus::NotAttempted: return "not_attempted";
  }
  return "?";
}

struct SolveResult {
  std::vector<cdouble> phi;
  double residual_norm = std::numeric_limits<double>::infinity();
  int iterations = 0;
  SolveStatus status = SolveStatus::NotAttempted;

  bool ok() const { return status == SolveStatus::Ok; }
};

namespace detail {

inline double max_abs(std::span<const cdouble> v) {
  double m = 0.0;
  for (const cdouble& c : v) m = std::max(m, std::abs(c));
  return m;
}

// residual r_i = F_i(phi) - X_i(phi, x)
inline std::vector<cdouble> system_residual(const HoloExpr& f, const NullRep& rep,
                                            std::span<const cdouble> phi,
                                            std::span<const double> x) {
  std::vector<cdouble> r = evaluate_gradient(f, phi);
  std::vector<cdouble> xs = x_system(rep, phi, x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= xs[i];
  return r;
}

inline SolveResult newton_attempt(const HoloExpr& f, const NullRep& rep,
                                  std::span<const double> x, std::span<const cdouble> seed,
                                  const SolveConfig& cfg) {
  const std::size_t k = static_cast<std::size_t>(rep.arity());
  SolveResult best;
  best.phi.assign(seed.begin(), seed.end());
  std::vector<cdouble> phi(seed.begin(), seed.end());
  for (int iter = 0; iter <= cfg.max_iters; ++iter) {
    std::vector<cdouble> r = system_residual(f, rep, phi, x);
    double rn = max_abs(r);
    if (rn < best.residual_norm) {
      best.phi = phi;
      best.residual_norm = rn;
      best.iterations = iter;
    }
    if (rn <= cfg.tol_residual) {
      best.status = SolveStatus::Ok;
      return best;
    }
    if (iter == cfg.max_iters) break;

    EvalResult ev = evaluate(f, phi);
    std::vector<cdouble> J = x_system_jacobian(rep, phi, x);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) J[i * k + j] = ev.hess[i][j] - J[i * k + j];
    LuFactors lu = lu_factor(std::move(J), k);
    if (lu.singular || lu.pivot_ratio > cfg.singular_condition) {
      best.status = SolveStatus::SingularJacobian;
      return best;
    }
    std::vector<cdouble> step = lu_solve(lu, r);

    // backtracking on the max-norm residual; accept the last halving regardless
    double scale = 1.0;
    std::vector<cdouble> trial(k);
    for (int h = 0; h <= cfg.max_halvings; ++h) {
      for (std::size_t i = 0; i < k; ++i) trial[i] = phi[i] - scale * step[i];
      double trial_norm = max_abs(system_residual(f, rep, trial, x));
      if (trial_norm < rn || h == cfg.max_halvings) break;
      scale *= 0.5;
    }
    phi = trial;
  }
  best.status = SolveStatus::NoConvergence;
  return best;
}

}  // namespace detail

/// Damped Newton iteration on F_i(phi) = X_i(phi, x). When no seed is given,
/// starts from phi_j = 1 and retries from pseudo-random perturbations of the
/// seed (fixed RNG stream, so results do not depend on call order).
inline SolveResult newton_solve(const HoloExpr& f, const NullRep& rep, const RealPoint& point,
                                const SolveConfig& cfg = {}) {
  const std::size_t k = static_cast<std::size_t>(rep.arity());
  if (f.arity != static_cast<int>(k))
    throw ArityError(0, "F has arity " + std::to_string(f.arity) + ", backend needs " +
                            std::to_string(k));
  detail::check_point(rep, point.coords);

  std::vector<cdouble> base_seed =
      cfg.seed_phi ? *cfg.seed_phi : std::vector<cdouble>(k, cdouble{1.0, 0.0});
  if (base_seed.size() != k) throw std::invalid_argument("seed_phi has wrong arity");

  std::mt19937_64 rng(cfg.rng_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SolveResult best;
  for (int attempt = 0; attempt <= cfg.seed_retries; ++attempt) {
    std::vector<cdouble> seed = base_seed;
    if (attempt > 0) {
      for (std::size_t j = 0; j < k; ++j) {
        double radius = std::sqrt(unit(rng));
        double angle = 2.0 * 3.14159265358979323846 * unit(rng);
        seed[j] += cdouble{radius * std::cos(angle), radius * std::sin(angle)};
      }
    }
    SolveResult r;
    try {
      r = detail::newton_attempt(f, rep, point.coords, seed, cfg);
    } catch (const EvalDomainError&) {
      r.status = SolveStatus::EvalDomain;
      r.phi = seed;
    }
    if (r.ok()) return r;
    if (r.residual_norm < best.residual_norm || best.status == SolveStatus::NotAttempted) best = r;
  }
  return best;
}

/// Closed-form solution of the linear-F specialization F = sum a_j phi_j
/// (quadratic backend only, where X is linear in phi): solves J_X phi = a
/// directly by Gauss-Jordan elimination. Kept free of the Newton/LU code path
/// so the two routes stay independent checks of each other.
inline SolveResult linear_f_oracle(std::span<const cdouble> a, const NullRep& rep,
                                   const RealPoint& point, double singular_condition = 1e14) {
  if (rep.kind != NullRep::Kind::GeneralQuadratic)
    throw std::invalid_argument("linear_f_oracle needs the general quadratic backend");
  const std::size_t k = static_cast<std::size_t>(rep.arity());
  if (a.size() != k) throw std::invalid_argument("coefficient vector has wrong arity");
  detail::check_point(rep, point.coords);

  std::vector<cdouble> phi0(k, cdouble{});
  std::vector<cdouble> m = x_system_jacobian(rep, phi0, point.coords);
  std::vector<cdouble> rhs(a.begin(), a.end());

  SolveResult out;
  out.iterations = 0;
  double max_piv = 0.0, min_piv = std::numeric_limits<double>::infinity();
  for (std::size_t col = 0; col < k; ++col) {
    std::size_t pr = col;
    for (std::size_t r = col + 1; r < k; ++r)
      if (std::abs(m[r * k + col]) > std::abs(m[pr * k + col])) pr = r;
    double piv = std::abs(m[pr * k + col]);
    if (piv == 0.0) {
      out.status = SolveStatus::SingularJacobian;
      return out;
    }
    max_piv = std::max(max_piv, piv);
    min_piv = std::min(min_piv, piv);
    if (pr != col) {
      for (std::size_t c = 0; c < k; ++c) std::swap(m[col * k + c], m[pr * k + c]);
      std::swap(rhs[col], rhs[pr]);
    }
    const cdouble d = m[col * k + col];
    for (std::size_t c = 0; c < k; ++c) m[col * k + c] /= d;
    rhs[col] /= d;
    for (std::size_t r = 0; r < k; ++r) {
      if (r == col) continue;
      const cdouble factor = m[r * k + col];
      if (factor == cdouble{}) continue;
      for (std::size_t c = 0; c < k; ++c) m[r * k + c] -= factor * m[col * k + c];
      rhs[r] -= factor * rhs[col];
    }
  }
  if (max_piv / min_piv > singular_condition) {
    out.status = SolveStatus::SingularJacobian;
    return out;
  }
  out.phi = rhs;
  // residual by substitution, not trust
  std::vector<cdouble> xs = x_system(rep, out.phi, point.coords);
  double rn = 0.0;
  for (std::size_t i = 0; i < k; ++i) rn = std::max(rn, std::abs(a[i] - xs[i]));
  out.residual_norm = rn;
  out.status = SolveStatus::Ok;
  return out;
}

struct AnchorFailure : std::runtime_error {
  AnchorFailure() : std::runtime_error("no grid cell solved from the provided seed") {}
};

struct BranchGrid {
  GridSpec grid;
  NullRep backend;
  std::vector<SolveResult> cells;  // one per grid cell, row-major
  std::size_t solved_count = 0;

  const SolveResult& cell(std::size_t linear) const { return cells[linear]; }
};

/// Sweeps the grid in row-major order; each cell seeds Newton with the phi of
/// the nearest already-solved predecessor neighbor (ties: fastest-varying
/// axis), falling back to the configured seed. Failures are recorded per cell.
inline BranchGrid continue_over_grid(const HoloExpr& f, const NullRep& rep, const GridSpec& grid,
                                     const SolveConfig& cfg = {}) {
  if (static_cast<int>(grid.dims()) != rep.n)
    throw std::invalid_argument("grid dimension does not match backend dimension");
  BranchGrid out{grid, rep, {}, 0};
  out.cells.resize(grid.size());
  const std::size_t total = grid.size();
  for (std::size_t lin = 0; lin < total; ++lin) {
    std::vector<int> mi = grid.multi_index(lin);
    SolveConfig cell_cfg = cfg;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t a = grid.dims(); a-- > 0;) {
      if (mi[a] == 0) continue;
      std::vector<int> prev = mi;
      --prev[a];
      const SolveResult& pr = out.cells[grid.linear_index(prev)];
      if (pr.ok() && grid.spacing(a) < best_dist) {
        best_dist = grid.spacing(a);
        cell_cfg.seed_phi = pr.phi;
      }
    }
    RealPoint x{grid.point(mi)};
    out.cells[lin] = newton_solve(f, rep, x, cell_cfg);
    if (out.cells[lin].ok()) ++out.solved_count;
  }
  if (out.solved_count == 0) throw AnchorFailure();
  return out;
}

}  // namespace conjugen
