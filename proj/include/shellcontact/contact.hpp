#pragma once

// Penalty contact against a rigid horizontal plate above the shell, with
// elastic-slip Coulomb friction. The plate only moves vertically, so the
// tangential slip of a contacting node is its radial motion.

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "shellcontact/assembly.hpp"
#include "shellcontact/geometry.hpp"
#include "shellcontact/kinematics.hpp"
#include "shellcontact/mechanics.hpp"

namespace shellcontact {

struct ContactParams {
  double mu = 0.0;
  /// Normal penalty stiffness per unit area (Pa/m).
  double k_n = 0.0;
  /// Tangential stick stiffness per unit area (Pa/m).
  double k_t = 0.0;
  double g_tol = 0.0;
  double cone_tol = 0.0;

  /// k_n = c_n E / h with c_n = 10, k_t = k_n, g_tol = h / 1000.
  static ContactParams defaults(const ShellModel& model, double mu = 0.0) {
    ContactParams p;
    p.mu = mu;
    p.k_n = 10.0 * model.E / model.h;
    p.k_t = p.k_n;
    p.g_tol = model.h / 1000.0;
    p.cone_tol = 1e-6 * model.E;
    return p;
  }

  void validate() const {
    if (!(mu >= 0.0)) throw ConfigError("friction.mu", "must be non-negative");
    if (!(k_n > 0.0)) throw ConfigError("contact.k_n_Pa_per_m", "must be positive");
    if (!(k_t > 0.0)) throw ConfigError("contact.k_t_Pa_per_m", "must be positive");
    if (!(g_tol > 0.0)) throw ConfigError("contact.g_tol_m", "must be positive");
    if (!(cone_tol > 0.0)) throw ConfigError("contact.cone_tol_Pa", "must be positive");
  }
};

struct ContactField {
  std::vector<double> gap;
  std::vector<double> pressure;
  /// Radial traction on the shell (Pa).
  std::vector<double> traction;
  std::vector<ContactStatus> status;
  /// Deformed tributary area used to turn tractions into nodal forces.
  std::vector<double> area;
  /// Friction work dissipated by the return mapping, per node (J).
  std::vector<double> dissipation;

  double total_dissipation() const {
    double d = 0.0;
    for (double x : dissipation) d += x;
    return d;
  }
  /// Elastic energy held by the tangential stick springs.
  double tangential_storage(double k_t) const {
    double e = 0.0;
    for (std::size_t i = 0; i < traction.size(); ++i)
      e += 0.5 * traction[i] * traction[i] / k_t * area[i];
    return e;
  }
  /// Energy held by the normal penalty.
  double normal_storage(double k_n) const {
    double e = 0.0;
    for (std::size_t i = 0; i < pressure.size(); ++i)
      e += 0.5 * pressure[i] * pressure[i] / k_n * area[i];
    return e;
  }
  bool any_contact() const {
    for (double p : pressure)
      if (p > 0.0) return true;
    return false;
  }
};

struct ContactEvaluation {
  ContactField field;
  /// Contact forces acting on the shell, interleaved (r_i, z_i).
  std::vector<double> forces;
  std::vector<std::optional<double>> anchors;
};

namespace detail {

struct AreaStencil {
  std::size_t first;
  std::size_t count;
};

inline AreaStencil area_stencil(std::size_t n, std::size_t i) {
  if (i == 0) return {0, 2};
  if (i + 1 == n) return {n - 2, 2};
  return {i - 1, 3};
}

// Deformed tributary annulus area 2 pi r_i ds_i, written as the reference
// area scaled by the hoop stretch and the mean meridional stretch.
template <typename T, std::size_t K>
T deformed_area(const ReferenceMesh& mesh, std::size_t i, const std::array<T, K>& v) {
  const std::size_t n = mesh.size();
  const double a0 = mesh.tributary_area[i];
  if constexpr (K == 4) {
    const T len = kinematics::segment_length(v[0], v[1], v[2], v[3]);
    if (i == 0) {
      const T lam = len / mesh.segment_length[0];
      return a0 * lam * lam;
    }
    return a0 * (v[2] / mesh.r0[i]) * (len / mesh.segment_length[n - 2]);
  } else {
    const T len1 = kinematics::segment_length(v[0], v[1], v[2], v[3]);
    const T len2 = kinematics::segment_length(v[2], v[3], v[4], v[5]);
    const double ref = mesh.segment_length[i - 1] + mesh.segment_length[i];
    return a0 * (v[2] / mesh.r0[i]) * ((len1 + len2) / ref);
  }
}

// Local index of node i's (r, z) inside its area stencil.
inline std::size_t centre_offset(std::size_t i, const AreaStencil& st) {
  return 2 * (i - st.first);
}

template <typename T>
T friction_potential(const T& slip, double k_t, double limit) {
  const double s = value_of(slip);
  if (k_t * std::abs(s) <= limit) return 0.5 * k_t * slip * slip;
  const double sign = s > 0.0 ? 1.0 : -1.0;
  return limit * sign * slip - 0.5 * limit * limit / k_t;
}

inline double deformed_area_value(const ReferenceMesh& mesh, const Configuration& c,
                                  std::size_t i) {
  const auto st = area_stencil(mesh.size(), i);
  if (st.count == 2) return deformed_area(mesh, i, stencil_values<4>(c, st.first));
  return deformed_area(mesh, i, stencil_values<6>(c, st.first));
}

}  // namespace detail

/// Contact potential: normal penalty plus the incremental friction potential
/// whose slip branch is capped at mu * pressure[i]. `anchors` must be set for
/// every node; nodes with zero pressure and no penetration contribute nothing.
inline void accumulate_contact(const ReferenceMesh& mesh, const Configuration& c,
                               const ContactParams& params, const std::vector<double>& anchors,
                               const std::vector<double>& pressure, Accumulator& acc) {
  const std::size_t n = mesh.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double pen = c.z[i] - c.plate_z;
    const double limit = params.mu * pressure[i];
    const bool normal_active = pen > 0.0;
    const bool friction_active = limit > 0.0;
    if (!normal_active && !friction_active) continue;
    const auto st = detail::area_stencil(n, i);
    const std::size_t off = detail::centre_offset(i, st);
    const double plate_z = c.plate_z;
    const double anchor = anchors[i];
    auto kernel = [&](const auto& v) {
      using T = std::decay_t<decltype(v[0])>;
      const T a = detail::deformed_area(mesh, i, v);
      T e(0.0);
      if (normal_active) {
        const T p = v[off + 1] - plate_z;
        e = e + 0.5 * params.k_n * p * p;
      }
      if (friction_active) e = e + detail::friction_potential(v[off] - anchor, params.k_t, limit);
      return a * e;
    };
    if (st.count == 2) {
      acc.add(detail::stencil_dofs<4>(st.first), detail::stencil_values<4>(c, st.first), kernel);
    } else {
      acc.add(detail::stencil_dofs<6>(st.first), detail::stencil_values<6>(c, st.first), kernel);
    }
  }
}

/// Normal pressure, return-mapped friction and nodal contact forces for the
/// current configuration. Missing anchors are initialised to the current r.
inline ContactEvaluation evaluate_contact(const ReferenceMesh& mesh, const Configuration& c,
                                         const ContactParams& params,
                                         const std::vector<std::optional<double>>& previous) {
  const std::size_t n = mesh.size();
  ContactEvaluation out;
  ContactField& f = out.field;
  f.gap.resize(n);
  f.pressure.assign(n, 0.0);
  f.traction.assign(n, 0.0);
  f.status.assign(n, ContactStatus::free);
  f.area.resize(n);
  f.dissipation.assign(n, 0.0);
  out.anchors.assign(n, std::nullopt);

  std::vector<double> trial_anchor(n);
  for (std::size_t i = 0; i < n; ++i) {
    f.gap[i] = c.plate_z - c.z[i];
    f.area[i] = detail::deformed_area_value(mesh, c, i);
    trial_anchor[i] = previous[i].value_or(c.r[i]);
    if (f.gap[i] >= 0.0) continue;
    const double p = -params.k_n * f.gap[i];
    f.pressure[i] = p;
    const double trial = -params.k_t * (c.r[i] - trial_anchor[i]);
    const double limit = params.mu * p;
    if (std::abs(trial) <= limit * (1.0 + 1e-12)) {
      f.status[i] = ContactStatus::stick;
      f.traction[i] = trial;
      out.anchors[i] = trial_anchor[i];
    } else {
      f.status[i] = ContactStatus::slip;
      const double t = trial > 0.0 ? limit : -limit;
      f.traction[i] = t;
      const double anchor = c.r[i] + t / params.k_t;
      out.anchors[i] = anchor;
      f.dissipation[i] = limit * std::abs(anchor - trial_anchor[i]) * f.area[i];
    }
  }

  Accumulator acc(EvalMode::gradient, 2 * n);
  accumulate_contact(mesh, c, params, trial_anchor, f.pressure, acc);
  out.forces = std::move(acc.gradient);
  for (double& x : out.forces) x = -x;
  return out;
}

/// Plate reaction: pressure integrated over the deformed tributary areas.
inline double contact_force_total(const ContactField& field) {
  double F = 0.0;
  for (std::size_t i = 0; i < field.pressure.size(); ++i) F += field.pressure[i] * field.area[i];
  return F;
}

}  // namespace shellcontact
