#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "shellcontact/errors.hpp"
#include "shellcontact/kinematics.hpp"

namespace shellcontact {

enum class BoundaryCondition { clamped, pinned };

inline const char* to_string(BoundaryCondition bc) {
  return bc == BoundaryCondition::clamped ? "clamped" : "pinned";
}

/// Reference geometry and material of the shell. SI units throughout.
struct ShellModel {
  double R = 25e-3;
  double h = 1.33e-3;
  double E = 1.5e6;
  double nu = 0.49;
  double theta_max = std::numbers::pi / 2.0;
  std::size_t n_nodes = 400;
  /// Ratio between consecutive meridian intervals walking from the apex;
  /// 1 gives a uniform polar-angle spacing.
  double apex_grading = 1.0;
  BoundaryCondition boundary = BoundaryCondition::clamped;

  /// Characteristic force E h^3 / R.
  double F0() const { return E * h * h * h / R; }
  /// Membrane modulus E h / (1 - nu^2).
  double membrane_modulus() const { return E * h / (1.0 - nu * nu); }
  /// Bending modulus E h^3 / (12 (1 - nu^2)).
  double bending_modulus() const { return E * h * h * h / (12.0 * (1.0 - nu * nu)); }

  void validate() const {
    auto fail = [](const char* key, const std::string& msg) { throw ConfigError(key, msg); };
    if (!(R > 0.0)) fail("geometry.R_m", "must be positive");
    if (!(h > 0.0)) fail("geometry.h_m", "must be positive");
    if (!(h / R < 0.2)) fail("geometry.h_m", "h/R must be below 0.2 for a thin shell");
    if (!(E > 0.0)) fail("material.E_Pa", "must be positive");
    if (!(nu >= 0.0 && nu < 0.5)) fail("material.nu", "must lie in [0, 0.5)");
    if (!(theta_max > 0.0 && theta_max < std::numbers::pi))
      fail("geometry.theta_max_rad", "must lie in (0, pi)");
    if (n_nodes < 50) {
      std::ostringstream os;
      os << "n_nodes = " << n_nodes << " is below the minimum of 50";
      fail("mesh.n_nodes", os.str());
    }
    if (!(apex_grading > 0.0)) fail("mesh.apex_grading", "must be positive");
  }
};

/// Discrete reference meridian, apex (node 0) to boundary (node n-1).
struct ReferenceMesh {
  std::vector<double> theta;
  std::vector<double> r0;
  std::vector<double> z0;
  /// Reference chord length of segment j = (j, j+1).
  std::vector<double> segment_length;
  /// Reference annulus area swept by segment j.
  std::vector<double> segment_area;
  /// Nodal tributary meridian length and area; the apex uses the polar cap.
  std::vector<double> tributary_length;
  std::vector<double> tributary_area;
  /// Discrete curvatures of the undeformed mesh, subtracted by the bending
  /// measure so that the reference state carries no bending strain.
  std::vector<double> kappa0_s;
  std::vector<double> kappa0_theta;
  /// Fixed clamp direction beyond the last node (unit vector and length).
  double ghost_dr = 0.0;
  double ghost_dz = 0.0;
  double ghost_length = 0.0;

  std::size_t size() const { return theta.size(); }
  std::size_t segments() const { return segment_length.size(); }

  double total_area() const {
    double a = 0.0;
    for (double x : tributary_area) a += x;
    return a;
  }
};

inline double spherical_cap_area(double R, double theta_max) {
  return 2.0 * std::numbers::pi * R * R * (1.0 - std::cos(theta_max));
}

inline ReferenceMesh build_mesh(const ShellModel& model) {
  model.validate();
  const std::size_t n = model.n_nodes;
  const double pi = std::numbers::pi;
  ReferenceMesh m;

  m.theta.resize(n);
  {
    // Interval k has width proportional to grading^k.
    std::vector<double> w(n - 1);
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
      w[k] = std::pow(model.apex_grading, static_cast<double>(k));
      total += w[k];
    }
    m.theta[0] = 0.0;
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
      acc += w[k];
      m.theta[k + 1] = model.theta_max * acc / total;
    }
    m.theta[n - 1] = model.theta_max;
  }

  m.r0.resize(n);
  m.z0.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    m.r0[i] = model.R * std::sin(m.theta[i]);
    m.z0[i] = model.R * std::cos(m.theta[i]);
  }
  m.r0[0] = 0.0;

  m.segment_length.resize(n - 1);
  m.segment_area.resize(n - 1);
  for (std::size_t j = 0; j + 1 < n; ++j) {
    m.segment_length[j] =
        kinematics::segment_length(m.r0[j], m.z0[j], m.r0[j + 1], m.z0[j + 1]);
    m.segment_area[j] = pi * (m.r0[j] + m.r0[j + 1]) * m.segment_length[j];
  }

  m.tributary_length.resize(n);
  m.tributary_area.resize(n);
  m.tributary_length[0] = 0.5 * m.segment_length[0];
  m.tributary_area[0] = spherical_cap_area(model.R, 0.5 * m.theta[1]);
  for (std::size_t i = 1; i < n; ++i) {
    const double left = 0.5 * m.segment_length[i - 1];
    const double right = i + 1 < n ? 0.5 * m.segment_length[i] : 0.0;
    m.tributary_length[i] = left + right;
    m.tributary_area[i] = 2.0 * pi * m.r0[i] * m.tributary_length[i];
  }

  const double last_gap = m.theta[n - 1] - m.theta[n - 2];
  const double ghost_angle = model.theta_max + 0.5 * last_gap;
  m.ghost_dr = std::cos(ghost_angle);
  m.ghost_dz = -std::sin(ghost_angle);
  m.ghost_length = m.segment_length[n - 2];

  m.kappa0_s.resize(n);
  m.kappa0_theta.resize(n);
  {
    const auto c = kinematics::apex(m.r0[0], m.z0[0], m.r0[1], m.z0[1]);
    m.kappa0_s[0] = c.meridional;
    m.kappa0_theta[0] = c.hoop;
  }
  for (std::size_t i = 1; i < n; ++i) {
    const bool last = i + 1 == n;
    const double rc = last ? m.r0[i] + m.ghost_length * m.ghost_dr : m.r0[i + 1];
    const double zc = last ? m.z0[i] + m.ghost_length * m.ghost_dz : m.z0[i + 1];
    const auto c =
        kinematics::interior(m.r0[i - 1], m.z0[i - 1], m.r0[i], m.z0[i], rc, zc);
    m.kappa0_s[i] = c.meridional;
    m.kappa0_theta[i] = c.hoop;
  }
  return m;
}

}  // namespace shellcontact
