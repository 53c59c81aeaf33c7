#pragma once

// Shared fixtures for the unit tests: random admissible configurations and
// finite-difference oracles that only call the energy (never its derivatives).

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include "shellcontact/geometry.hpp"
#include "shellcontact/mechanics.hpp"

namespace shellcontact::fixtures {

inline ShellModel default_model(std::size_t n = 400) {
  ShellModel m;
  m.n_nodes = n;
  return m;
}

/// Smooth random perturbation of the reference shape plus small nodal noise.
/// Amplitudes are fractions of the thickness so segments never collapse.
inline Configuration random_configuration(const ReferenceMesh& mesh, const ShellModel& model,
                                          std::mt19937& rng, double amplitude = 0.2) {
  Configuration c = reference_configuration(mesh);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double a = amplitude * model.h;
  const double ar[3] = {u(rng), u(rng), u(rng)};
  const double az[3] = {u(rng), u(rng), u(rng)};
  const double shift = u(rng) * model.h;
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    const double t = mesh.theta[i] / model.theta_max;
    double dr = 0.0, dz = shift;
    for (int k = 0; k < 3; ++k) {
      dr += ar[k] * std::sin((k + 1) * std::numbers::pi * t);
      dz += az[k] * std::cos((k + 1) * std::numbers::pi * t);
    }
    c.r[i] += a * dr * std::sin(mesh.theta[i]) + (i > 0 ? 1e-3 * a * u(rng) : 0.0);
    c.z[i] += a * dz + 1e-3 * a * u(rng);
  }
  c.r[0] = 0.0;
  return c;
}

/// Central-difference gradient of `energy` with respect to every unknown.
inline std::vector<double> fd_gradient(const std::function<double(const Configuration&)>& energy,
                                       Configuration c, double step) {
  std::vector<double> g(2 * c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (int k = 0; k < 2; ++k) {
      double& x = k == 0 ? c.r[i] : c.z[i];
      const double x0 = x;
      x = x0 + step;
      const double ep = energy(c);
      x = x0 - step;
      const double em = energy(c);
      x = x0;
      g[2 * i + k] = (ep - em) / (2.0 * step);
    }
  }
  return g;
}

inline double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return norm(d) / norm(b);
}

/// Reflects every node above the plane z = zc through it, producing an
/// isometrically inverted cap joined to the undeformed shell by a ridge.
inline Configuration mirror_inverted(const ReferenceMesh& mesh, double zc) {
  Configuration c = reference_configuration(mesh);
  for (std::size_t i = 0; i < mesh.size(); ++i)
    if (c.z[i] > zc) c.z[i] = 2.0 * zc - c.z[i];
  return c;
}

}  // namespace shellcontact::fixtures
