#include "bellvis/ipm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bellvis/errors.hpp"

namespace bellvis {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double norm_inf(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s = std::max(s, std::abs(v));
  return s;
}

bool all_finite(std::span<const double> a) {
  for (double v : a) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::vector<double> theta_regularized(const ThetaDiag& theta, std::span<const double> reg_primal) {
  std::vector<double> tr(theta.values.size());
  for (std::size_t j = 0; j < tr.size(); ++j) {
    tr[j] = 1.0 / (1.0 / theta.values[j] + reg_primal[j]);
  }
  return tr;
}

// y -> A (ThetaR (A^T y)) + R_d y
void apply_normal_operator(const ImplicitLp& lp, std::span<const double> theta_r,
                           std::span<const double> reg_dual, std::span<const double> y,
                           std::span<double> scratch_n, std::span<double> out) {
  lp.at_times_y(y, scratch_n);
  for (std::size_t j = 0; j < scratch_n.size(); ++j) scratch_n[j] *= theta_r[j];
  lp.a_times_x(scratch_n, out);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += reg_dual[i] * y[i];
}

int cg_iteration_limit(std::size_t m, double mu, const CgSchedule& schedule) {
  double limit = static_cast<double>(std::min<std::size_t>(m, schedule.initial));
  if (mu < 1e-2 && mu > 0.0) {
    const int decades = static_cast<int>(std::ceil(std::log10(1e-2 / mu)));
    for (int t = 0; t < decades && limit < schedule.cap; ++t) limit *= schedule.growth;
  }
  return static_cast<int>(std::min(limit, static_cast<double>(schedule.cap)));
}

}  // namespace

IpmState IpmState::initial(const ImplicitLp& lp, const IpmSettings& settings) {
  const std::size_t n = lp.cols();
  const std::size_t m = lp.rows();
  const double dual0 = std::max(1.0, std::abs(settings.objective_scale));
  IpmState state{
      std::vector<double>(n, 0.5), std::vector<double>(m, 0.0), std::vector<double>(n, dual0),
      std::vector<double>(n, dual0), std::vector<double>(n, 0.0), std::vector<double>(m, 0.0),
      ThetaDiag::ones(n), 0.0};
  state.refresh(lp);
  const double reg = std::max(settings.reg_scale * state.mu, settings.reg_floor);
  state.reg_primal.assign(n, reg);
  state.reg_dual.assign(m, reg);
  return state;
}

void IpmState::refresh(const ImplicitLp& lp) {
  const std::size_t n = lp.cols();
  if (x.size() != n || s.size() != n || w.size() != n || y.size() != lp.rows()) {
    throw ShapeError("iterate size mismatch");
  }
  std::vector<double> t(n);
  double comp = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double gap_u = 1.0 - x[j];
    t[j] = std::max(1.0 / (s[j] / x[j] + w[j] / gap_u), 1e-300);
    comp += x[j] * s[j] + gap_u * w[j];
  }
  theta = ThetaDiag(std::move(t));
  mu = comp / static_cast<double>(2 * n);
}

std::vector<double> PartialCholesky::schur_diag_compressed() const {
  std::vector<double> out;
  out.reserve(m - k);
  for (std::size_t i = 0; i < m; ++i) {
    if (!is_pivot[i]) out.push_back(schur_diag[i]);
  }
  return out;
}

PartialCholesky partial_cholesky(const ImplicitLp& lp, const ThetaDiag& theta,
                                 std::span<const double> reg_primal,
                                 std::span<const double> reg_dual, int rank) {
  const std::size_t m = lp.rows();
  if (theta.values.size() != lp.cols() || reg_primal.size() != lp.cols() ||
      reg_dual.size() != m) {
    throw ShapeError("partial_cholesky size mismatch");
  }
  const std::size_t k = std::min<std::size_t>(std::max(rank, 0), m);

  PartialCholesky pc;
  pc.m = m;
  pc.k = k;
  pc.pivot_order.resize(k);
  pc.l.assign(m * k, 0.0);
  pc.d_l.resize(k);
  pc.is_pivot.assign(m, 0);

  const ThetaDiag theta_r(theta_regularized(theta, reg_primal));

  // Updated diagonal of G_R, downdated as pivots are eliminated.
  std::vector<double> work = lp.diag_aat(theta_r);
  double max_diag = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    work[i] += reg_dual[i];
    max_diag = std::max(max_diag, work[i]);
  }

  std::vector<double> col(m);
  for (std::size_t t = 0; t < k; ++t) {
    std::size_t p = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      if (!pc.is_pivot[i] && work[i] > best) {
        best = work[i];
        p = i;
      }
    }
    if (!(best > 0.0) || !std::isfinite(best)) {
      throw NumericalError("non-positive pivot in partial Cholesky");
    }
    pc.pivot_order[t] = static_cast<std::uint32_t>(p);
    pc.is_pivot[p] = 1;

    lp.col_aat(theta_r, p, col);
    col[p] += reg_dual[p];
    for (std::size_t tau = 0; tau < t; ++tau) {
      const double factor = pc.d_l[tau] * pc.l[tau * m + p];
      if (factor == 0.0) continue;
      const double* ltau = &pc.l[tau * m];
      for (std::size_t i = 0; i < m; ++i) col[i] -= factor * ltau[i];
    }

    const double piv = work[p];
    pc.d_l[t] = piv;
    double* lt = &pc.l[t * m];
    const double inv = 1.0 / piv;
    for (std::size_t i = 0; i < m; ++i) lt[i] = col[i] * inv;
    lt[p] = 1.0;
    for (std::size_t tau = 0; tau < t; ++tau) lt[pc.pivot_order[tau]] = 0.0;

    for (std::size_t i = 0; i < m; ++i) {
      if (!pc.is_pivot[i]) work[i] -= piv * lt[i] * lt[i];
    }
  }

  pc.schur_diag.assign(m, 1.0);
  const double floor = std::max(1e-14 * max_diag, 1e-300);
  for (std::size_t i = 0; i < m; ++i) {
    if (!pc.is_pivot[i]) pc.schur_diag[i] = std::max(work[i], floor);
  }
  return pc;
}

void apply_preconditioner(const PartialCholesky& pc, std::span<const double> r,
                          std::span<double> z) {
  const std::size_t m = pc.m;
  const std::size_t k = pc.k;
  if (r.size() != m || z.size() != m) throw ShapeError("apply_preconditioner size mismatch");
  std::copy(r.begin(), r.end(), z.begin());

  // Forward unit-triangular solve in pivot order.
  for (std::size_t t = 0; t < k; ++t) {
    const std::size_t p = pc.pivot_order[t];
    const double v = z[p];
    if (v != 0.0) {
      const double* lt = &pc.l[t * m];
      for (std::size_t i = 0; i < m; ++i) z[i] -= v * lt[i];
    }
    z[p] = v;
  }

  for (std::size_t t = 0; t < k; ++t) z[pc.pivot_order[t]] /= pc.d_l[t];
  for (std::size_t i = 0; i < m; ++i) {
    if (!pc.is_pivot[i]) z[i] /= pc.schur_diag[i];
  }

  // Backward transposed solve; L[p_t, t] = 1 and L[p_tau, t] = 0 for tau < t.
  for (std::size_t t = k; t-- > 0;) {
    const std::size_t p = pc.pivot_order[t];
    const double* lt = &pc.l[t * m];
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) acc += lt[i] * z[i];
    z[p] = 2.0 * z[p] - acc;
  }
}

std::vector<double> apply_preconditioner(const PartialCholesky& pc, std::span<const double> r) {
  std::vector<double> z(r.size());
  apply_preconditioner(pc, r, z);
  return z;
}

PcgResult pcg_solve(const ImplicitLp& lp, const ThetaDiag& theta,
                    std::span<const double> reg_primal, std::span<const double> reg_dual,
                    const PartialCholesky& pc, std::span<const double> g, double tol,
                    int max_iters) {
  const std::size_t m = lp.rows();
  if (g.size() != m) throw ShapeError("pcg_solve size mismatch");

  PcgResult result;
  result.dy.assign(m, 0.0);
  const double g_norm = norm2(g);
  if (g_norm == 0.0) {
    result.converged = true;
    return result;
  }

  const std::vector<double> theta_r = theta_regularized(theta, reg_primal);
  std::vector<double> scratch_n(lp.cols());
  std::vector<double> r(g.begin(), g.end());
  std::vector<double> z(m), p(m), q(m);

  apply_preconditioner(pc, r, z);
  std::copy(z.begin(), z.end(), p.begin());
  double rz = dot(r, z);
  const double rz0 = rz;
  if (!(rz0 > 0.0) || !std::isfinite(rz0)) {
    result.rel_residual = 1.0;
    return result;  // preconditioner lost positive definiteness
  }
  double res = 1.0;

  // Convergence is measured in the preconditioned (energy) norm, which is
  // the metric the partial Cholesky is built to contract; the plain residual
  // ratio is kept for reporting.
  for (int it = 1; it <= max_iters; ++it) {
    apply_normal_operator(lp, theta_r, reg_dual, p, scratch_n, q);
    const double pq = dot(p, q);
    if (!(pq > 0.0) || !std::isfinite(pq)) {
      result.iterations = it;
      result.rel_residual = res;
      return result;  // breakdown: operator lost positive definiteness
    }
    const double alpha = rz / pq;
    for (std::size_t i = 0; i < m; ++i) {
      result.dy[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    res = norm2(r) / g_norm;
    result.iterations = it;
    apply_preconditioner(pc, r, z);
    const double rz_next = dot(r, z);
    if (!std::isfinite(rz_next) || rz_next < 0.0) {
      result.rel_residual = res;
      return result;
    }
    if (std::sqrt(rz_next / rz0) <= tol) {
      result.converged = true;
      result.rel_residual = res;
      return result;
    }
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < m; ++i) p[i] = z[i] + beta * p[i];
  }
  result.rel_residual = res;
  return result;
}

Direction compute_direction(const ImplicitLp& lp, const IpmState& state, const NewtonRhs& rhs,
                            const PartialCholesky& pc, const IpmSettings& settings) {
  const std::size_t n = lp.cols();
  const std::size_t m = lp.rows();
  if (rhs.primal.size() != m || rhs.dual.size() != n || rhs.comp_lower.size() != n ||
      rhs.comp_upper.size() != n) {
    throw ShapeError("newton rhs size mismatch");
  }

  Direction dir;
  const std::vector<double> theta_r = theta_regularized(state.theta, state.reg_primal);

  // Reduce to the regularized normal equations: f folds the complementarity
  // targets into the dual residual, g = A ThetaR f + primal residual.
  std::vector<double> f(n), scaled(n);
  for (std::size_t j = 0; j < n; ++j) {
    f[j] = rhs.dual[j] - rhs.comp_lower[j] / state.x[j] +
           rhs.comp_upper[j] / (1.0 - state.x[j]);
    scaled[j] = theta_r[j] * f[j];
  }
  std::vector<double> g(m);
  lp.a_times_x(scaled, g);
  for (std::size_t i = 0; i < m; ++i) g[i] += rhs.primal[i];

  const int limit = cg_iteration_limit(m, state.mu, settings.cg_schedule);
  // Inexact-Newton forcing: far from the optimum a loose direction is enough,
  // so the tolerance tracks mu down until it reaches the eps_cg floor.
  const double cg_tol = std::max(settings.eps_cg, std::min(1e-2, 0.1 * state.mu));
  PcgResult cg = pcg_solve(lp, state.theta, state.reg_primal, state.reg_dual, pc, g,
                           cg_tol, limit);
  dir.cg_iterations = cg.iterations;
  dir.cg_residual = cg.rel_residual;
  if (!cg.converged) return dir;

  dir.dy = std::move(cg.dy);
  std::vector<double> aty(n);
  lp.at_times_y(dir.dy, aty);
  dir.dx.resize(n);
  dir.ds.resize(n);
  dir.dw.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    dir.dx[j] = theta_r[j] * (aty[j] - f[j]);
    dir.ds[j] = (rhs.comp_lower[j] - state.s[j] * dir.dx[j]) / state.x[j];
    dir.dw[j] = (rhs.comp_upper[j] + state.w[j] * dir.dx[j]) / (1.0 - state.x[j]);
  }
  dir.ok = all_finite(dir.dx) && all_finite(dir.dy) && all_finite(dir.ds) && all_finite(dir.dw);
  return dir;
}

Direction compute_direction(const ImplicitLp& lp, const IpmState& state, const NewtonRhs& rhs,
                            const IpmSettings& settings) {
  const PartialCholesky pc = partial_cholesky(lp, state.theta, state.reg_primal,
                                              state.reg_dual, settings.chol_rank);
  return compute_direction(lp, state, rhs, pc, settings);
}

namespace {

// Largest step keeping x in (0, u) and s, w positive, before the
// fraction-to-boundary factor.
double max_primal_step(std::span<const double> x, std::span<const double> dx) {
  double a = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (dx[j] < 0.0) a = std::min(a, -x[j] / dx[j]);
    if (dx[j] > 0.0) a = std::min(a, (1.0 - x[j]) / dx[j]);
  }
  return a;
}

double max_positive_step(std::span<const double> v, std::span<const double> dv) {
  double a = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < v.size(); ++j) {
    if (dv[j] < 0.0) a = std::min(a, -v[j] / dv[j]);
  }
  return a;
}

}  // namespace

IpmResult ipm_solve(const ImplicitLp& lp, const IpmSettings& settings) {
  if (!(settings.objective_scale > 0.0) || !std::isfinite(settings.objective_scale)) {
    throw ConfigError("objective scale must be positive");
  }
  const std::size_t n = lp.cols();
  const std::size_t m = lp.rows();
  const std::size_t vis = lp.vis_col();
  const double scale = settings.objective_scale;
  const double b_value = lp.rhs_value();

  IpmResult result;
  IpmState state = IpmState::initial(lp, settings);

  if (settings.trace) {
    *settings.trace << "iteration,mu,gap,cg_iterations,residual\n";
  }

  std::vector<double> ax(m), aty(n), rp(m), rd(n);
  double gap = std::numeric_limits<double>::infinity();

  // The preconditioner rank may be grown by the stagnation ladder; growth is
  // sticky because late systems only get harder as mu shrinks.
  const int base_rank = std::max(0, settings.chol_rank);
  const int rank_cap = static_cast<int>(std::min<std::size_t>(
      m, static_cast<std::size_t>(std::max(base_rank, settings.chol_rank_cap))));
  int work_rank = static_cast<int>(std::min<std::size_t>(m, base_rank));

  for (int iter = 0;; ++iter) {
    state.refresh(lp);
    lp.a_times_x(state.x, ax);
    for (std::size_t i = 0; i < m; ++i) rp[i] = b_value - ax[i];
    lp.at_times_y(state.y, aty);
    for (std::size_t j = 0; j < n; ++j) {
      // The KKT system below is the minimization form, so the maximization
      // objective enters negated; the reported objective flips it back.
      const double cj = j == vis ? -scale : 0.0;
      rd[j] = cj - aty[j] - state.s[j] + state.w[j];
    }
    const double primal_obj = -scale * state.x[vis];
    double dual_obj = 0.0;
    for (std::size_t i = 0; i < m; ++i) dual_obj += b_value * state.y[i];
    for (std::size_t j = 0; j < n; ++j) dual_obj -= state.w[j];
    gap = std::abs(primal_obj - dual_obj) / (std::abs(primal_obj) + 1.0);
    const double pinf = norm_inf(rp) / (1.0 + b_value);
    const double dinf = norm_inf(rd) / (1.0 + scale);

    if (gap <= settings.epsilon && pinf <= settings.epsilon && dinf <= settings.epsilon) {
      result.status = IpmStatus::Optimal;
      break;
    }
    if (iter >= settings.max_ipm_iters) {
      result.status = IpmStatus::IterationLimit;
      break;
    }
    if (settings.deadline && std::chrono::steady_clock::now() > *settings.deadline) {
      result.status = IpmStatus::IterationLimit;
      result.deadline_exceeded = true;
      break;
    }

    const double base_reg = std::max(settings.reg_scale * state.mu, settings.reg_floor);
    bool accepted = false;
    IpmIterationStats stats;
    stats.iteration = iter;
    stats.mu = state.mu;
    stats.gap = gap;

    NewtonRhs rhs;
    rhs.primal = rp;
    rhs.dual = rd;
    rhs.comp_lower.resize(n);
    rhs.comp_upper.resize(n);

    // Computes a direction for the current rhs, its fraction-to-boundary
    // step, and the mu the step would reach; accounts CG work either way.
    auto try_step = [&](const PartialCholesky& pc, Direction& dir, double& alpha,
                        double& mu_next) {
      dir = compute_direction(lp, state, rhs, pc, settings);
      result.total_cg_iterations += dir.cg_iterations;
      stats.cg_iterations += dir.cg_iterations;
      stats.cg_iterations_max = std::max(stats.cg_iterations_max, dir.cg_iterations);
      if (!dir.ok) return false;
      alpha = std::min(1.0, 0.995 * std::min(max_primal_step(state.x, dir.dx),
                                             std::min(max_positive_step(state.s, dir.ds),
                                                      max_positive_step(state.w, dir.dw))));
      if (!(alpha > 1e-10)) return false;
      double comp = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double xj = state.x[j] + alpha * dir.dx[j];
        comp += xj * (state.s[j] + alpha * dir.ds[j]) +
                (1.0 - xj) * (state.w[j] + alpha * dir.dw[j]);
      }
      mu_next = comp / static_cast<double>(2 * n);
      return true;
    };

    // Acceptance requires a genuine reduction of the complementarity measure;
    // the ladder below recenters, re-regularizes, and finally grows the
    // preconditioner until it gets one.
    const double mu_accept = 0.99 * state.mu;

    for (;;) {
      for (int escalation = 0; escalation < 4 && !accepted; ++escalation) {
        const double reg = base_reg * std::pow(10.0, escalation);
        state.reg_primal.assign(n, reg);
        state.reg_dual.assign(m, reg);

        PartialCholesky pc;
        try {
          pc = partial_cholesky(lp, state.theta, state.reg_primal, state.reg_dual,
                                work_rank);
        } catch (const NumericalError&) {
          continue;  // insufficient regularization; escalate
        }

        Direction dir;
        double alpha = 0.0;
        double mu_next = state.mu;
        bool usable = false;

        // Predictor: pure affine direction aiming at zero complementarity.
        for (std::size_t j = 0; j < n; ++j) {
          rhs.comp_lower[j] = -state.x[j] * state.s[j];
          rhs.comp_upper[j] = -(1.0 - state.x[j]) * state.w[j];
        }
        Direction aff;
        double alpha_aff = 0.0;
        double mu_aff = state.mu;
        if (try_step(pc, aff, alpha_aff, mu_aff)) {
          // Corrector: recenter toward sigma*mu and absorb the predictor's
          // second-order complementarity terms.
          const double ratio = std::max(mu_aff, 0.0) / state.mu;
          const double sigma = std::clamp(ratio * ratio * ratio, 0.01, 0.8);
          for (std::size_t j = 0; j < n; ++j) {
            rhs.comp_lower[j] =
                sigma * state.mu - state.x[j] * state.s[j] - aff.dx[j] * aff.ds[j];
            rhs.comp_upper[j] =
                sigma * state.mu - (1.0 - state.x[j]) * state.w[j] + aff.dx[j] * aff.dw[j];
          }
          usable = try_step(pc, dir, alpha, mu_next) && mu_next <= mu_accept;
        }

        if (!usable) {
          // Centering fallback: first-order step toward 0.8*mu restores
          // centrality when the Mehrotra step stalls at the boundary.
          const double sigma = 0.8;
          for (std::size_t j = 0; j < n; ++j) {
            rhs.comp_lower[j] = sigma * state.mu - state.x[j] * state.s[j];
            rhs.comp_upper[j] = sigma * state.mu - (1.0 - state.x[j]) * state.w[j];
          }
          usable = try_step(pc, dir, alpha, mu_next) && mu_next <= mu_accept;
        }
        if (!usable) continue;

        for (std::size_t j = 0; j < n; ++j) {
          state.x[j] += alpha * dir.dx[j];
          state.s[j] += alpha * dir.ds[j];
          state.w[j] += alpha * dir.dw[j];
        }
        for (std::size_t i = 0; i < m; ++i) state.y[i] += alpha * dir.dy[i];
        stats.step = alpha;
        stats.cg_residual = dir.cg_residual;
        accepted = true;
      }
      if (accepted || work_rank >= rank_cap) break;
      work_rank = std::min(rank_cap, std::max(1, 2 * work_rank));
    }

    if (!accepted) {
      result.status = IpmStatus::NumericalFailure;
      result.iterations_detail.push_back(stats);
      break;
    }
    ++result.ipm_iterations;
    result.iterations_detail.push_back(stats);
    if (settings.trace) {
      *settings.trace << stats.iteration << ',' << stats.mu << ',' << stats.gap << ','
                      << stats.cg_iterations << ',' << stats.cg_residual << '\n';
    }
  }

  result.objective = state.x[vis];
  result.final_gap = gap;
  return result;
}

}  // namespace bellvis
