#pragma once

// Displacement-controlled quasi-static driver. Each plate position is solved
// as the minimiser of an incremental potential (elastic energy, normal
// penalty, and a friction potential whose Coulomb cap uses the lagged
// pressure). The lag is iterated until the return-mapped residual with the
// actual pressure vanishes.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <future>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "shellcontact/assembly.hpp"
#include "shellcontact/banded.hpp"
#include "shellcontact/contact.hpp"
#include "shellcontact/errors.hpp"
#include "shellcontact/geometry.hpp"
#include "shellcontact/mechanics.hpp"
#include "shellcontact/observables.hpp"

namespace shellcontact {

enum class LoadingMode { plate, point };

inline const char* to_string(LoadingMode m) { return m == LoadingMode::plate ? "plate" : "point"; }

struct Schedule {
  double d_max = 0.0;
  std::size_t n_steps_load = 500;
  std::size_t n_steps_unload = 500;
  LoadingMode mode = LoadingMode::plate;
  bool unload = true;

  static Schedule defaults(const ShellModel& m) {
    Schedule s;
    s.d_max = 0.25 * m.R;
    return s;
  }

  void validate(const ShellModel& m) const {
    if (!(d_max > 0.0 && d_max < m.R)) throw ConfigError("schedule.d_max_m", "must lie in (0, R)");
    if (n_steps_load < 1) throw ConfigError("schedule.n_steps_load", "must be >= 1");
    if (unload && n_steps_unload < 1) throw ConfigError("schedule.n_steps_unload", "must be >= 1");
  }
};

struct SolverParams {
  /// Force tolerance on the free-unknown residual (N).
  double residual_tol = 0.0;
  std::size_t max_newton = 60;
  double backtrack = 0.5;
  double armijo = 1e-4;
  double min_substep = 1.0 / 1024.0;
  /// Artificial viscosity relative to the largest Hessian diagonal entry;
  /// only used on a retry after the minimum substep has failed.
  double stabilization = 1e-6;
  /// Iteration budget multiplier for the stabilized retry.
  std::size_t stabilized_newton_factor = 20;
  std::size_t max_lag_iterations = 60;
  double energy_audit_tol = 1e-3;
  /// Pressure threshold for contact intervals, relative to E.
  double p_tol = 1e-6;

  static SolverParams defaults(const ShellModel& m) {
    SolverParams p;
    p.residual_tol = 1e-8 * m.F0();
    return p;
  }

  void validate() const {
    if (!(residual_tol > 0.0)) throw ConfigError("solver.residual_tol_N", "must be positive");
    if (max_newton < 1) throw ConfigError("solver.max_newton", "must be >= 1");
    if (!(backtrack > 0.0 && backtrack < 1.0))
      throw ConfigError("solver.backtrack", "must lie in (0, 1)");
    if (!(armijo > 0.0 && armijo < 1.0)) throw ConfigError("solver.armijo", "must lie in (0, 1)");
    if (!(min_substep > 0.0 && min_substep < 1.0))
      throw ConfigError("solver.min_substep", "must lie in (0, 1)");
    if (!(stabilization > 0.0)) throw ConfigError("solver.stabilization", "must be positive");
    if (!(energy_audit_tol > 0.0))
      throw ConfigError("solver.energy_audit_tol", "must be positive");
    if (!(p_tol > 0.0)) throw ConfigError("solver.p_tol", "must be positive");
    if (stabilized_newton_factor < 1)
      throw ConfigError("solver.stabilized_newton_factor", "must be >= 1");
    if (max_lag_iterations < 1) throw ConfigError("solver.max_lag_iterations", "must be >= 1");
  }
};

struct Events {
  std::optional<std::size_t> hertz_deviation;
  std::optional<std::size_t> buckling;
  std::optional<std::size_t> unbuckling;
};

struct Trajectory {
  std::vector<StepRecord> records;
  Events events;
  /// Hertz prefactor k in A = k F^(2/3) fitted on the earliest contact window.
  std::optional<double> hertz_prefactor;
  std::optional<double> W;
  /// Largest |audit residual| / max(F0 R, cumulative plate work) over steps.
  double audit_ratio = 0.0;
  /// Set when the run stopped early on a step failure.
  std::optional<std::string> failure;
  std::vector<Configuration> snapshots;
  std::vector<ContactField> snapshot_fields;
  std::vector<std::size_t> snapshot_steps;

  double final_dissipation() const { return records.empty() ? 0.0 : records.back().D; }
};

/// Converged state after one (sub)step.
struct SolverState {
  Configuration config;
  ContactField field;
  double F = 0.0;
  double d = 0.0;
  double D = 0.0;
  double elastic_energy = 0.0;
  double contact_storage = 0.0;
  double plate_work = 0.0;
};

struct StepResult {
  SolverState state;
  std::size_t substeps = 0;
  std::size_t newton_iterations = 0;
  bool stabilized = false;
  double residual = 0.0;
};

/// Anderson acceleration for a fixed point x = G(x): keeps the last `depth`
/// differences and extrapolates with a regularised least-squares fit.
class AndersonMixer {
 public:
  explicit AndersonMixer(std::size_t depth) : depth_(depth) {}

  std::vector<double> next(const std::vector<double>& x, const std::vector<double>& gx) {
    const std::size_t n = x.size();
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i) f[i] = gx[i] - x[i];
    if (!prev_f_.empty()) {
      std::vector<double> df(n), dg(n);
      for (std::size_t i = 0; i < n; ++i) {
        df[i] = f[i] - prev_f_[i];
        dg[i] = gx[i] - prev_g_[i];
      }
      dF_.push_back(std::move(df));
      dG_.push_back(std::move(dg));
      if (dF_.size() > depth_) {
        dF_.erase(dF_.begin());
        dG_.erase(dG_.begin());
      }
    }
    prev_f_ = f;
    prev_g_ = gx;
    const std::size_t m = dF_.size();
    if (m == 0) return gx;

    // Normal equations (dF^T dF + eps I) gamma = dF^T f.
    std::vector<double> M(m * m), b(m);
    double trace = 0.0;
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t c = 0; c < m; ++c) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += dF_[a][i] * dF_[c][i];
        M[a * m + c] = s;
      }
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += dF_[a][i] * f[i];
      b[a] = s;
      trace += M[a * m + a];
    }
    if (!(trace > 0.0)) return gx;
    for (std::size_t a = 0; a < m; ++a) M[a * m + a] += 1e-10 * trace;
    // Gaussian elimination with partial pivoting.
    std::vector<std::size_t> piv(m);
    for (std::size_t k = 0; k < m; ++k) piv[k] = k;
    for (std::size_t k = 0; k < m; ++k) {
      std::size_t best = k;
      for (std::size_t r = k + 1; r < m; ++r)
        if (std::abs(M[r * m + k]) > std::abs(M[best * m + k])) best = r;
      if (M[best * m + k] == 0.0) return gx;
      if (best != k) {
        for (std::size_t c = 0; c < m; ++c) std::swap(M[k * m + c], M[best * m + c]);
        std::swap(b[k], b[best]);
      }
      for (std::size_t r = k + 1; r < m; ++r) {
        const double l = M[r * m + k] / M[k * m + k];
        for (std::size_t c = k; c < m; ++c) M[r * m + c] -= l * M[k * m + c];
        b[r] -= l * b[k];
      }
    }
    std::vector<double> gamma(m);
    for (std::size_t k = m; k-- > 0;) {
      double s = b[k];
      for (std::size_t c = k + 1; c < m; ++c) s -= M[k * m + c] * gamma[c];
      gamma[k] = s / M[k * m + k];
    }
    std::vector<double> out = gx;
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t i = 0; i < n; ++i) out[i] -= gamma[a] * dG_[a][i];
    return out;
  }

 private:
  std::size_t depth_;
  std::vector<double> prev_f_, prev_g_;
  std::vector<std::vector<double>> dF_, dG_;
};

class QuasiStaticSolver {
 public:
  QuasiStaticSolver(const ReferenceMesh& mesh, const ShellModel& model,
                    const ContactParams& contact, const SolverParams& params, LoadingMode mode)
      : mesh_(mesh), model_(model), contact_(contact), params_(params), mode_(mode) {
    const std::size_t n = mesh.size();
    fixed_.assign(2 * n, false);
    fixed_[dof_r(0)] = true;
    fixed_[dof_r(n - 1)] = true;
    fixed_[dof_z(n - 1)] = true;
    if (mode_ == LoadingMode::point) fixed_[dof_z(0)] = true;
  }

  SolverState initial_state() const {
    SolverState s;
    s.config = reference_configuration(mesh_);
    s.field = evaluate_contact(mesh_, s.config, contact_, s.config.anchors).field;
    return s;
  }

  /// Advances `state` to indentation d (plate or apex at R - d), bisecting the
  /// increment on failure. Throws StepFailure.
  StepResult solve_step(const SolverState& state, double d, std::size_t step_index) const {
    StepResult result;
    result.state = state;
    advance(result, state.d, d, 0, step_index);
    return result;
  }

  bool is_fixed(std::size_t dof) const { return fixed_[dof]; }

 private:
  struct Context {
    double target_z = 0.0;  // plate height, or apex height in point mode
    std::vector<double> anchors;
    std::vector<double> pressure_lag;
    double viscosity = 0.0;
    std::vector<double> x_ref;
  };

  struct Attempt {
    bool converged = false;
    std::vector<double> x;
    std::size_t iterations = 0;
    double residual = std::numeric_limits<double>::infinity();
    double tolerance = 0.0;
  };

  // Forces cannot be resolved below the rounding of the coordinates times the
  // stiffest Hessian entry; this floor grows like n^3 through the bending term.
  double effective_tolerance(const BandedSymmetricMatrix& H, const std::vector<double>& x) const {
    double xmax = 0.0;
    for (double v : x) xmax = std::max(xmax, std::abs(v));
    const double floor = std::numeric_limits<double>::epsilon() * H.max_abs_diagonal() * xmax;
    return std::max(params_.residual_tol, floor);
  }

  Configuration configuration_at(const std::vector<double>& x, const Context& ctx) const {
    Configuration c;
    c.r.resize(mesh_.size());
    c.z.resize(mesh_.size());
    c.unpack(x);
    c.plate_z = mode_ == LoadingMode::plate ? ctx.target_z
                                            : std::numeric_limits<double>::infinity();
    return c;
  }

  void assemble(const std::vector<double>& x, const Context& ctx, Accumulator& acc) const {
    const Configuration c = configuration_at(x, ctx);
    accumulate_elastic(mesh_, model_, c, acc);
    if (mode_ == LoadingMode::plate)
      accumulate_contact(mesh_, c, contact_, ctx.anchors, ctx.pressure_lag, acc);
    if (ctx.viscosity > 0.0) {
      for (std::size_t k = 0; k < x.size(); ++k) {
        if (fixed_[k]) continue;
        const double dx = x[k] - ctx.x_ref[k];
        acc.value += 0.5 * ctx.viscosity * dx * dx;
        if (acc.mode != EvalMode::value) acc.gradient[k] += ctx.viscosity * dx;
        if (acc.mode == EvalMode::hessian) acc.hessian.add(k, k, ctx.viscosity);
      }
    }
  }

  double potential(const std::vector<double>& x, const Context& ctx) const {
    Accumulator acc(EvalMode::value, x.size());
    try {
      assemble(x, ctx, acc);
    } catch (const DegenerateConfigurationError&) {
      return std::numeric_limits<double>::infinity();
    }
    return std::isfinite(acc.value) ? acc.value : std::numeric_limits<double>::infinity();
  }

  double free_norm(const std::vector<double>& g) const {
    double m = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k)
      if (!fixed_[k]) m = std::max(m, std::abs(g[k]));
    return m;
  }

  // Newton with Hessian shifting and Armijo backtracking on the potential.
  Attempt newton(std::vector<double> x, const Context& ctx, std::size_t max_iter) const {
    Attempt a;
    const std::size_t n = x.size();
    BandedCholesky chol;
    for (std::size_t it = 0; it <= max_iter; ++it) {
      Accumulator acc(EvalMode::hessian, n);
      try {
        assemble(x, ctx, acc);
      } catch (const DegenerateConfigurationError&) {
        a.x = std::move(x);
        return a;
      }
      a.tolerance = effective_tolerance(acc.hessian, x);
      for (std::size_t k = 0; k < n; ++k) {
        if (!fixed_[k]) continue;
        acc.gradient[k] = 0.0;
        acc.hessian.zero_row_and_column(k);
        acc.hessian.set(k, k, 1.0);
      }
      const double gnorm = free_norm(acc.gradient);
      a.residual = gnorm;
      a.iterations = it;
      if (gnorm < a.tolerance) {
        a.converged = true;
        a.x = std::move(x);
        return a;
      }
      if (it == max_iter) break;

      // Indefinite Hessian: find a near-minimal diagonal shift that makes it
      // positive definite, so the step still follows negative curvature.
      const double diag_scale = std::max(acc.hessian.max_abs_diagonal(), 1e-300);
      auto shifted_factor = [&](double t) {
        BandedSymmetricMatrix H = acc.hessian;
        if (t > 0.0)
          for (std::size_t k = 0; k < n; ++k)
            H.add(k, k, t * std::max(std::abs(acc.hessian(k, k)), 1e-8 * diag_scale));
        return chol.factor(H);
      };
      double tau = 0.0;
      if (!shifted_factor(0.0)) {
        double lo = 0.0;
        tau = 1e-12;
        while (!shifted_factor(tau)) {
          lo = tau;
          tau *= 10.0;
          if (tau > 1e6) {
            a.x = std::move(x);
            return a;
          }
        }
        if (lo > 0.0) {
          for (int b = 0; b < 6; ++b) {
            const double mid = std::sqrt(lo * tau);
            if (shifted_factor(mid)) tau = mid;
            else lo = mid;
          }
        }
        tau *= 1.5;
        shifted_factor(tau);
      }
      std::vector<double> rhs(n);
      for (std::size_t k = 0; k < n; ++k) rhs[k] = -acc.gradient[k];
      std::vector<double> dx = chol.solve(rhs);
      for (std::size_t k = 0; k < n; ++k)
        if (fixed_[k]) dx[k] = 0.0;
      double slope = 0.0;
      for (std::size_t k = 0; k < n; ++k) slope += acc.gradient[k] * dx[k];

      const double p0 = acc.value;
      double alpha = 1.0;
      bool accepted = false;
      std::vector<double> xt(n);
      for (int ls = 0; ls < 40; ++ls) {
        for (std::size_t k = 0; k < n; ++k) xt[k] = x[k] + alpha * dx[k];
        const double pt = potential(xt, ctx);
        if (pt <= p0 + params_.armijo * alpha * slope) {
          accepted = true;
          break;
        }
        alpha *= params_.backtrack;
      }
      if (accepted && tau > 0.0 && alpha == 1.0) {
        // A shifted step underestimates the move along soft directions.
        double best = potential(xt, ctx);
        std::vector<double> xe(n);
        for (int grow = 0; grow < 20; ++grow) {
          alpha *= 2.0;
          for (std::size_t k = 0; k < n; ++k) xe[k] = x[k] + alpha * dx[k];
          const double pe = potential(xe, ctx);
          if (!(pe < best)) break;
          best = pe;
          xt = xe;
        }
      }
      if (!accepted) {
        // Near convergence the potential change drops below roundoff; accept a
        // full step that reduces the gradient instead.
        for (std::size_t k = 0; k < n; ++k) xt[k] = x[k] + dx[k];
        Accumulator g(EvalMode::gradient, n);
        try {
          assemble(xt, ctx, g);
        } catch (const DegenerateConfigurationError&) {
          a.x = std::move(x);
          return a;
        }
        if (!(free_norm(g.gradient) < gnorm)) {
          a.x = std::move(x);
          return a;
        }
      }
      x = xt;
    }
    a.x = std::move(x);
    return a;
  }

  // Point mode: moves the apex to its target and the free unknowns by the
  // linear response to that prescribed increment, so Newton starts from a
  // smooth dimple instead of a single displaced node.
  void predict_apex(std::vector<double>& x, const Context& ctx, double target_z) const {
    const std::size_t n = x.size();
    const std::size_t apex = dof_z(0);
    const double delta = target_z - x[apex];
    if (delta == 0.0) return;
    Accumulator acc(EvalMode::hessian, n);
    try {
      assemble(x, ctx, acc);
    } catch (const DegenerateConfigurationError&) {
      x[apex] = target_z;
      return;
    }
    std::vector<double> rhs(n, 0.0);
    const std::size_t bw = acc.hessian.half_bandwidth();
    for (std::size_t k = apex > bw ? apex - bw : 0; k < std::min(n, apex + bw + 1); ++k)
      if (!fixed_[k]) rhs[k] = -acc.hessian(k, apex) * delta;
    for (std::size_t k = 0; k < n; ++k) {
      if (!fixed_[k]) continue;
      acc.hessian.zero_row_and_column(k);
      acc.hessian.set(k, k, 1.0);
    }
    BandedCholesky chol;
    x[apex] = target_z;
    if (!chol.factor(acc.hessian)) return;
    const std::vector<double> dx = chol.solve(rhs);
    std::vector<double> trial = x;
    for (std::size_t k = 0; k < n; ++k)
      if (!fixed_[k]) trial[k] += dx[k];
    if (std::isfinite(potential(trial, ctx))) x = std::move(trial);
  }

  struct Equilibrium {
    bool converged = false;
    Configuration config;
    ContactEvaluation contact;
    std::size_t iterations = 0;
    double residual = 0.0;
  };

  // Newton on the lagged-pressure potential, repeated until the residual with
  // the actual return-mapped tractions is below tolerance.
  Equilibrium equilibrate(const SolverState& start, double target_z, double viscosity,
                          std::size_t max_iter) const {
    Equilibrium eq;
    const std::size_t n = mesh_.size();
    Context ctx;
    ctx.target_z = target_z;
    ctx.anchors.resize(n);
    std::vector<std::optional<double>> anchors(n);
    for (std::size_t i = 0; i < n; ++i) {
      ctx.anchors[i] = start.config.anchors[i].value_or(start.config.r[i]);
      anchors[i] = ctx.anchors[i];
    }
    ctx.pressure_lag = start.field.pressure;
    std::vector<double> x = start.config.packed();
    if (mode_ == LoadingMode::point) predict_apex(x, ctx, target_z);
    ctx.x_ref = x;
    if (viscosity > 0.0) {
      Accumulator acc(EvalMode::hessian, x.size());
      assemble(x, ctx, acc);
      ctx.viscosity = viscosity * acc.hessian.max_abs_diagonal();
    }

    const std::size_t lag_limit =
        mode_ == LoadingMode::plate && contact_.mu > 0.0 ? params_.max_lag_iterations : 1;
    AndersonMixer mixer(5);
    for (std::size_t lag = 0; lag < lag_limit; ++lag) {
      Attempt a = newton(std::move(x), ctx, max_iter);
      eq.iterations += a.iterations;
      x = std::move(a.x);
      if (!a.converged) {
        eq.residual = a.residual;
        return eq;
      }
      Configuration c = configuration_at(x, ctx);
      if (mode_ == LoadingMode::point) {
        eq.config = std::move(c);
        eq.config.anchors.assign(n, std::nullopt);
        eq.config.status.assign(n, ContactStatus::free);
        eq.contact = evaluate_contact(mesh_, eq.config, contact_, eq.config.anchors);
        eq.converged = true;
        eq.residual = a.residual;
        return eq;
      }
      ContactEvaluation ce = evaluate_contact(mesh_, c, contact_, anchors);
      std::vector<double> r = energy_gradient(mesh_, model_, c);
      for (std::size_t k = 0; k < r.size(); ++k) {
        r[k] -= ce.forces[k];
        if (ctx.viscosity > 0.0) r[k] += ctx.viscosity * (x[k] - ctx.x_ref[k]);
      }
      eq.residual = free_norm(r);
      if (eq.residual < a.tolerance) {
        c.anchors = ce.anchors;
        c.status = ce.field.status;
        eq.config = std::move(c);
        eq.contact = std::move(ce);
        eq.converged = true;
        return eq;
      }
      ctx.pressure_lag = mixer.next(ctx.pressure_lag, ce.field.pressure);
      for (double& p : ctx.pressure_lag) p = std::max(p, 0.0);
    }
    return eq;
  }

  SolverState finish(const SolverState& prev, Equilibrium&& eq, double d) const {
    SolverState s;
    s.config = std::move(eq.config);
    s.field = std::move(eq.contact.field);
    s.d = d;
    if (mode_ == LoadingMode::plate) {
      s.F = contact_force_total(s.field);
    } else {
      s.F = -energy_gradient(mesh_, model_, s.config)[dof_z(0)];
    }
    s.D = prev.D + s.field.total_dissipation();
    s.elastic_energy = elastic_energy(mesh_, model_, s.config);
    s.contact_storage =
        s.field.normal_storage(contact_.k_n) + s.field.tangential_storage(contact_.k_t);
    s.plate_work = prev.plate_work + 0.5 * (prev.F + s.F) * (d - prev.d);
    return s;
  }

  void advance(StepResult& result, double d_from, double d_to, int depth,
               std::size_t step_index) const {
    const double apex_z = mesh_.z0.front();
    const double fraction = std::ldexp(1.0, -depth);
    Equilibrium eq =
        equilibrate(result.state, apex_z - d_to, 0.0, params_.max_newton);
    result.newton_iterations += eq.iterations;
    if (eq.converged) {
      result.state = finish(result.state, std::move(eq), d_to);
      result.substeps += 1;
      result.residual = std::max(result.residual, eq.residual);
      return;
    }
    if (0.5 * fraction >= params_.min_substep) {
      const double mid = 0.5 * (d_from + d_to);
      advance(result, d_from, mid, depth + 1, step_index);
      advance(result, mid, d_to, depth + 1, step_index);
      return;
    }
    Equilibrium st = equilibrate(result.state, apex_z - d_to, params_.stabilization,
                                 params_.max_newton * params_.stabilized_newton_factor);
    result.newton_iterations += st.iterations;
    if (!st.converged) {
      std::ostringstream os;
      os << "step " << step_index << " failed at d = " << d_to
         << " m after substepping and stabilization; residual " << st.residual << " N";
      throw StepFailure(step_index, st.residual, os.str());
    }
    result.stabilized = true;
    result.state = finish(result.state, std::move(st), d_to);
    result.substeps += 1;
    result.residual = std::max(result.residual, st.residual);
  }

  const ReferenceMesh& mesh_;
  const ShellModel& model_;
  ContactParams contact_;
  SolverParams params_;
  LoadingMode mode_;
  std::vector<bool> fixed_;
};

// ---------------------------------------------------------------------------
// Event detection on a finished trajectory.

/// Relative one-step area change that marks a snap between the flattened and
/// the inverted branch.
inline constexpr double kSnapAreaJump = 0.05;

/// First loading step where the contact area drops by more than 5 % relative
/// to the previous step while the plate force also drops: the signature of a
/// snap under displacement control. The apex leaving the plate is not used; it
/// happens continuously, well before the snap, while the contact is still a
/// wide annulus. A smooth inversion with rising force is not a snap either.
inline std::optional<std::size_t> detect_buckling(const std::vector<StepRecord>& records) {
  if (records.size() < 2) throw InputError("buckling detection needs at least 2 steps");
  for (std::size_t k = 1; k < records.size(); ++k) {
    const auto& prev = records[k - 1];
    const auto& cur = records[k];
    if (cur.phase != Phase::load || prev.phase != Phase::load) continue;
    if (prev.A > 0.0 && cur.A > 0.0 && prev.A - cur.A > kSnapAreaJump * prev.A && cur.F < prev.F)
      return cur.step;
  }
  return std::nullopt;
}

/// First unloading step after buckling where the area jumps up by more than
/// 5 % while the force rises (snap back out of the inverted shape).
inline std::optional<std::size_t> detect_unbuckling(const std::vector<StepRecord>& records,
                                                    std::optional<std::size_t> buckling) {
  if (!buckling) return std::nullopt;
  for (std::size_t k = 1; k < records.size(); ++k) {
    const auto& prev = records[k - 1];
    const auto& cur = records[k];
    if (cur.phase != Phase::unload || cur.step <= *buckling) continue;
    if (prev.A > 0.0 && cur.A - prev.A > kSnapAreaJump * prev.A && cur.F > prev.F) return cur.step;
  }
  return std::nullopt;
}

struct HertzDeviation {
  double prefactor = 0.0;
  std::optional<std::size_t> index;
};

/// Fits A = k F^(2/3) over the first `window` contacting loading steps and
/// returns the first later step that starts a run of `persistence` steps
/// deviating from the fit by more than `threshold`.
inline HertzDeviation detect_hertz_deviation(const std::vector<StepRecord>& records,
                                             std::size_t window = 5, double threshold = 0.05,
                                             std::size_t persistence = 3) {
  std::vector<const StepRecord*> loading;
  for (const auto& r : records)
    if (r.phase == Phase::load && r.A > 0.0 && r.F > 0.0) loading.push_back(&r);
  if (loading.size() < window || window < 5)
    throw InputError("Hertz fit needs at least 5 early contacting steps");
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < window; ++k) {
    const double f23 = std::pow(loading[k]->F, 2.0 / 3.0);
    num += loading[k]->A * f23;
    den += f23 * f23;
  }
  HertzDeviation out;
  out.prefactor = num / den;
  std::size_t run = 0;
  for (std::size_t k = window; k < loading.size(); ++k) {
    const double fit = out.prefactor * std::pow(loading[k]->F, 2.0 / 3.0);
    const bool off = std::abs(loading[k]->A / fit - 1.0) > threshold;
    run = off ? run + 1 : 0;
    if (run == persistence) {
      out.index = loading[k + 1 - persistence]->step;
      break;
    }
  }
  return out;
}

/// Labels every record: none without contact; B while buckled with the apex
/// off the plate; otherwise H before the Hertz deviation and I after it. On
/// unloading the sequence runs B -> I -> H, returning to H once the area is
/// back within the Hertz tolerance.
inline void classify_regimes(std::vector<StepRecord>& records, const Events& ev,
                             std::optional<double> hertz_prefactor, double threshold = 0.05) {
  bool unload_hertz = false;
  for (auto& r : records) {
    if (r.A <= 0.0) {
      r.regime = Regime::none;
      continue;
    }
    const bool buckled_window =
        ev.buckling && r.step >= *ev.buckling && (!ev.unbuckling || r.step < *ev.unbuckling);
    if (buckled_window && !r.apex_in_contact) {
      r.regime = Regime::buckled;
      continue;
    }
    if (r.phase == Phase::load) {
      const bool past = ev.hertz_deviation && r.step >= *ev.hertz_deviation;
      r.regime = past ? Regime::intermediate : Regime::hertzian;
      continue;
    }
    if (!unload_hertz && hertz_prefactor) {
      const double fit = *hertz_prefactor * std::pow(r.F, 2.0 / 3.0);
      unload_hertz = std::abs(r.A / fit - 1.0) <= threshold && !buckled_window;
    }
    r.regime = unload_hertz ? Regime::hertzian : Regime::intermediate;
  }
}

// ---------------------------------------------------------------------------

inline StepRecord make_record(const SolverState& s, std::size_t step, Phase phase,
                              double p_tol) {
  StepRecord r;
  r.step = step;
  r.phase = phase;
  r.d = s.d;
  r.F = s.F;
  r.intervals = contact_intervals(s.field, s.config, p_tol);
  r.A = contact_area(r.intervals);
  for (double p : s.field.pressure) r.p_max = std::max(r.p_max, p);
  r.p_mean = r.A > 0.0 ? r.F / r.A : 0.0;
  const SizeAndLocation sl = contact_size_and_location(r.intervals);
  r.size = sl.size;
  r.location = sl.location;
  r.r_in = sl.r_in;
  r.r_out = sl.r_out;
  r.apex_in_contact = !r.intervals.empty() && r.intervals.front().first_node == 0;
  r.D = s.D;
  r.elastic_energy = s.elastic_energy;
  r.contact_storage = s.contact_storage;
  r.plate_work = s.plate_work;
  return r;
}

struct RunOptions {
  std::set<std::size_t> snapshot_steps;
};

/// Ramps the indentation linearly to d_max over the loading steps and back to
/// zero when unloading, recording one StepRecord per step (step 0 is the
/// undeformed state). A step failure ends the run with a partial trajectory
/// and `failure` set.
inline Trajectory run_schedule(const ShellModel& model, const ReferenceMesh& mesh,
                               const ContactParams& contact, const Schedule& schedule,
                               const SolverParams& params, const RunOptions& options = {}) {
  model.validate();
  contact.validate();
  schedule.validate(model);
  params.validate();
  const QuasiStaticSolver solver(mesh, model, contact, params, schedule.mode);
  const double p_tol = params.p_tol * model.E;
  const double energy_scale = model.F0() * model.R;

  Trajectory t;
  SolverState state = solver.initial_state();
  t.records.push_back(make_record(state, 0, Phase::load, p_tol));
  auto snapshot = [&](std::size_t step) {
    if (options.snapshot_steps.count(step)) {
      t.snapshots.push_back(state.config);
      t.snapshot_fields.push_back(state.field);
      t.snapshot_steps.push_back(step);
    }
  };
  snapshot(0);

  const std::size_t total =
      schedule.n_steps_load + (schedule.unload ? schedule.n_steps_unload : 0);
  for (std::size_t step = 1; step <= total; ++step) {
    const bool loading = step <= schedule.n_steps_load;
    const double d =
        loading ? schedule.d_max * static_cast<double>(step) /
                      static_cast<double>(schedule.n_steps_load)
                : schedule.d_max *
                      (1.0 - static_cast<double>(step - schedule.n_steps_load) /
                                 static_cast<double>(schedule.n_steps_unload));
    StepResult res;
    try {
      res = solver.solve_step(state, d, step);
    } catch (const StepFailure& e) {
      t.failure = e.what();
      break;
    }
    const SolverState& prev = state;
    const double work_inc = res.state.plate_work - prev.plate_work;
    const double stored_inc = (res.state.elastic_energy + res.state.contact_storage) -
                              (prev.elastic_energy + prev.contact_storage);
    const double diss_inc = res.state.D - prev.D;
    StepRecord rec =
        make_record(res.state, step, loading ? Phase::load : Phase::unload, p_tol);
    rec.substeps = res.substeps;
    rec.stabilized = res.stabilized;
    rec.newton_iterations = res.newton_iterations;
    rec.audit_residual = work_inc - stored_inc - diss_inc;
    t.audit_ratio = std::max(
        t.audit_ratio,
        std::abs(rec.audit_residual) / std::max(energy_scale, std::abs(res.state.plate_work)));
    state = std::move(res.state);
    t.records.push_back(std::move(rec));
    snapshot(step);
  }

  if (t.records.size() >= 2) t.events.buckling = detect_buckling(t.records);
  t.events.unbuckling = detect_unbuckling(t.records, t.events.buckling);
  try {
    const HertzDeviation hd = detect_hertz_deviation(t.records);
    t.hertz_prefactor = hd.prefactor;
    t.events.hertz_deviation = hd.index;
  } catch (const InputError&) {
  }
  classify_regimes(t.records, t.events, t.hertz_prefactor);
  if (schedule.unload && !t.failure) t.W = hysteresis_energy(t.records);
  return t;
}

struct SweepRow {
  double mu = 0.0;
  std::optional<double> W;
  std::optional<double> d_c;
  bool buckled = false;
  std::optional<std::string> failure;
  Trajectory trajectory;
};

/// One independent load/unload run per friction coefficient, up to `jobs`
/// at a time; rows come back ordered by mu.
inline std::vector<SweepRow> sweep_mu(const ShellModel& model, const ReferenceMesh& mesh,
                                      const ContactParams& base_contact, const Schedule& schedule,
                                      const SolverParams& params, std::vector<double> mu_list,
                                      std::size_t jobs = 1, const RunOptions& options = {}) {
  if (mu_list.empty()) throw InputError("mu list is empty");
  std::sort(mu_list.begin(), mu_list.end());
  for (std::size_t k = 0; k < mu_list.size(); ++k) {
    if (mu_list[k] < 0.0) throw InputError("mu values must be non-negative");
    if (k > 0 && mu_list[k] == mu_list[k - 1]) throw InputError("duplicate mu in sweep list");
  }
  auto run_one = [&](double mu) {
    SweepRow row;
    row.mu = mu;
    ContactParams c = base_contact;
    c.mu = mu;
    row.trajectory = run_schedule(model, mesh, c, schedule, params, options);
    row.failure = row.trajectory.failure;
    row.W = row.trajectory.W;
    row.buckled = row.trajectory.events.buckling.has_value();
    if (row.buckled) row.d_c = row.trajectory.records[*row.trajectory.events.buckling].d;
    return row;
  };
  std::vector<SweepRow> rows(mu_list.size());
  jobs = std::max<std::size_t>(1, jobs);
  for (std::size_t start = 0; start < mu_list.size(); start += jobs) {
    std::vector<std::future<SweepRow>> batch;
    const std::size_t end = std::min(mu_list.size(), start + jobs);
    for (std::size_t k = start; k < end; ++k)
      batch.push_back(std::async(jobs > 1 ? std::launch::async : std::launch::deferred, run_one,
                                 mu_list[k]));
    for (std::size_t k = start; k < end; ++k) rows[k] = batch[k - start].get();
  }
  return rows;
}

}  // namespace shellcontact
