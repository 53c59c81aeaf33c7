#pragma once

// Geometrically nonlinear axisymmetric shell energy. Membrane strains are
// Biot-type (stretch - 1) with exact kinematics; bending strains are changes
// of the discrete meridional and hoop curvatures.

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <vector>

#include "shellcontact/assembly.hpp"
#include "shellcontact/errors.hpp"
#include "shellcontact/geometry.hpp"
#include "shellcontact/kinematics.hpp"

namespace shellcontact {

enum class ContactStatus { free, stick, slip };

inline const char* to_string(ContactStatus s) {
  switch (s) {
    case ContactStatus::free: return "free";
    case ContactStatus::stick: return "stick";
    case ContactStatus::slip: return "slip";
  }
  return "?";
}

/// Full mutable state of a run: deformed meridian, plate height, stick anchors.
struct Configuration {
  std::vector<double> r;
  std::vector<double> z;
  double plate_z = 0.0;
  /// Plate-frame radial position where node i last stuck; empty when free.
  std::vector<std::optional<double>> anchors;
  std::vector<ContactStatus> status;

  std::size_t size() const { return r.size(); }

  std::vector<double> packed() const {
    std::vector<double> x(2 * r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
      x[dof_r(i)] = r[i];
      x[dof_z(i)] = z[i];
    }
    return x;
  }

  void unpack(const std::vector<double>& x) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      r[i] = x[dof_r(i)];
      z[i] = x[dof_z(i)];
    }
  }
};

/// Undeformed shell with the plate just touching the apex.
inline Configuration reference_configuration(const ReferenceMesh& mesh) {
  Configuration c;
  c.r = mesh.r0;
  c.z = mesh.z0;
  c.plate_z = mesh.z0.front();
  c.anchors.assign(mesh.size(), std::nullopt);
  c.status.assign(mesh.size(), ContactStatus::free);
  return c;
}

struct StrainState {
  std::vector<double> lambda_s;      // per segment
  std::vector<double> lambda_theta;  // per node
  std::vector<double> dkappa_s;      // per node
  std::vector<double> dkappa_theta;  // per node

  double eps_s(std::size_t j) const { return lambda_s[j] - 1.0; }
  double eps_theta(std::size_t i) const { return lambda_theta[i] - 1.0; }
};

struct EnergyParts {
  double membrane = 0.0;
  double bending = 0.0;
  double total() const { return membrane + bending; }
};

namespace detail {

inline void check_configuration(const ReferenceMesh& mesh, const Configuration& c) {
  const std::size_t n = mesh.size();
  if (c.r.size() != n || c.z.size() != n)
    throw InputError("configuration size does not match the mesh");
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const double len = kinematics::segment_length(c.r[j], c.z[j], c.r[j + 1], c.z[j + 1]);
    if (!(len > 1e-12 * mesh.segment_length[j])) {
      std::ostringstream os;
      os << "segment " << j << " has collapsed to zero length";
      throw DegenerateConfigurationError(os.str());
    }
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (!(c.r[i] > 0.0)) {
      std::ostringstream os;
      os << "node " << i << " reached the symmetry axis (r = " << c.r[i] << ")";
      throw DegenerateConfigurationError(os.str());
    }
  }
}

template <typename T>
T membrane_density(double Y, double nu, const T& es, const T& et) {
  return 0.5 * Y * (es * es + 2.0 * nu * es * et + et * et);
}

template <typename T>
T bending_density(double B, double nu, const T& ks, const T& kt) {
  return 0.5 * B * (ks * ks + 2.0 * nu * ks * kt + kt * kt);
}

// Bending stencil of node i: apex and boundary nodes use two real nodes.
struct BendingStencil {
  std::size_t first;  // first node of the stencil
  std::size_t count;  // 2 or 3
};

inline std::optional<BendingStencil> bending_stencil(const ShellModel& model,
                                                     const ReferenceMesh& mesh,
                                                     std::size_t i) {
  const std::size_t n = mesh.size();
  if (i == 0) return BendingStencil{0, 2};
  if (i + 1 == n) {
    if (model.boundary == BoundaryCondition::pinned) return std::nullopt;
    return BendingStencil{n - 2, 2};
  }
  return BendingStencil{i - 1, 3};
}

template <typename T, std::size_t K>
kinematics::Curvatures<T> stencil_curvatures(const ReferenceMesh& mesh, std::size_t i,
                                             const std::array<T, K>& v) {
  const std::size_t n = mesh.size();
  if constexpr (K == 4) {
    if (i == 0) return kinematics::apex(v[0], v[1], v[2], v[3]);
    (void)n;
    const T rc = v[2] + mesh.ghost_length * mesh.ghost_dr;
    const T zc = v[3] + mesh.ghost_length * mesh.ghost_dz;
    return kinematics::interior(v[0], v[1], v[2], v[3], rc, zc);
  } else {
    return kinematics::interior(v[0], v[1], v[2], v[3], v[4], v[5]);
  }
}

template <std::size_t K>
std::array<std::size_t, K> stencil_dofs(std::size_t first) {
  std::array<std::size_t, K> d{};
  for (std::size_t a = 0; a < K / 2; ++a) {
    d[2 * a] = dof_r(first + a);
    d[2 * a + 1] = dof_z(first + a);
  }
  return d;
}

template <std::size_t K>
std::array<double, K> stencil_values(const Configuration& c, std::size_t first) {
  std::array<double, K> x{};
  for (std::size_t a = 0; a < K / 2; ++a) {
    x[2 * a] = c.r[first + a];
    x[2 * a + 1] = c.z[first + a];
  }
  return x;
}

inline void accumulate_membrane(const ReferenceMesh& mesh, const ShellModel& model,
                                const Configuration& c, Accumulator& acc) {
  const double Y = model.membrane_modulus();
  const double nu = model.nu;
  for (std::size_t j = 0; j + 1 < mesh.size(); ++j) {
    const double l0 = mesh.segment_length[j];
    const double area = mesh.segment_area[j];
    const double ra0 = mesh.r0[j];
    const double rb0 = mesh.r0[j + 1];
    const bool apex = j == 0;
    acc.add(stencil_dofs<4>(j), stencil_values<4>(c, j), [&](const auto& v) {
      using T = std::decay_t<decltype(v[0])>;
      const T es = kinematics::segment_length(v[0], v[1], v[2], v[3]) / l0 - 1.0;
      const T ea = apex ? es : v[0] / ra0 - 1.0;
      const T eb = v[2] / rb0 - 1.0;
      const T et = 0.5 * (ea + eb);
      return area * membrane_density(Y, nu, es, et);
    });
  }
}

inline void accumulate_bending(const ReferenceMesh& mesh, const ShellModel& model,
                               const Configuration& c, Accumulator& acc) {
  const double B = model.bending_modulus();
  const double nu = model.nu;
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    const auto st = bending_stencil(model, mesh, i);
    if (!st) continue;
    const double area = mesh.tributary_area[i];
    const double k0s = mesh.kappa0_s[i];
    const double k0t = mesh.kappa0_theta[i];
    auto kernel = [&](const auto& v) {
      const auto k = stencil_curvatures(mesh, i, v);
      return area * bending_density(B, nu, k.meridional - k0s, k.hoop - k0t);
    };
    if (st->count == 2) {
      acc.add(stencil_dofs<4>(st->first), stencil_values<4>(c, st->first), kernel);
    } else {
      acc.add(stencil_dofs<6>(st->first), stencil_values<6>(c, st->first), kernel);
    }
  }
}

}  // namespace detail

inline StrainState strain_state(const ReferenceMesh& mesh, const Configuration& c) {
  detail::check_configuration(mesh, c);
  const std::size_t n = mesh.size();
  StrainState s;
  s.lambda_s.resize(n - 1);
  for (std::size_t j = 0; j + 1 < n; ++j)
    s.lambda_s[j] = kinematics::segment_length(c.r[j], c.z[j], c.r[j + 1], c.z[j + 1]) /
                    mesh.segment_length[j];
  s.lambda_theta.resize(n);
  s.lambda_theta[0] = s.lambda_s[0];
  for (std::size_t i = 1; i < n; ++i) s.lambda_theta[i] = c.r[i] / mesh.r0[i];

  s.dkappa_s.resize(n);
  s.dkappa_theta.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    kinematics::Curvatures<double> k{};
    if (i == 0) {
      k = detail::stencil_curvatures(mesh, 0, detail::stencil_values<4>(c, 0));
    } else if (i + 1 == n) {
      k = detail::stencil_curvatures(mesh, i, detail::stencil_values<4>(c, n - 2));
    } else {
      k = detail::stencil_curvatures(mesh, i, detail::stencil_values<6>(c, i - 1));
    }
    s.dkappa_s[i] = k.meridional - mesh.kappa0_s[i];
    s.dkappa_theta[i] = k.hoop - mesh.kappa0_theta[i];
  }
  return s;
}

inline EnergyParts elastic_energy_parts(const ReferenceMesh& mesh, const ShellModel& model,
                                        const Configuration& c) {
  detail::check_configuration(mesh, c);
  EnergyParts e;
  Accumulator m(EvalMode::value, 0), b(EvalMode::value, 0);
  detail::accumulate_membrane(mesh, model, c, m);
  detail::accumulate_bending(mesh, model, c, b);
  e.membrane = m.value;
  e.bending = b.value;
  return e;
}

inline double elastic_energy(const ReferenceMesh& mesh, const ShellModel& model,
                             const Configuration& c) {
  return elastic_energy_parts(mesh, model, c).total();
}

/// Accumulates the elastic energy (and derivatives per `acc.mode`) into `acc`.
inline void accumulate_elastic(const ReferenceMesh& mesh, const ShellModel& model,
                               const Configuration& c, Accumulator& acc) {
  detail::check_configuration(mesh, c);
  detail::accumulate_membrane(mesh, model, c, acc);
  detail::accumulate_bending(mesh, model, c, acc);
}

/// dU/dx over all nodal unknowns, interleaved (r_i, z_i).
inline std::vector<double> energy_gradient(const ReferenceMesh& mesh, const ShellModel& model,
                                           const Configuration& c) {
  Accumulator acc(EvalMode::gradient, 2 * mesh.size());
  accumulate_elastic(mesh, model, c, acc);
  return std::move(acc.gradient);
}

inline BandedSymmetricMatrix energy_hessian(const ReferenceMesh& mesh, const ShellModel& model,
                                            const Configuration& c) {
  Accumulator acc(EvalMode::hessian, 2 * mesh.size());
  accumulate_elastic(mesh, model, c, acc);
  return std::move(acc.hessian);
}

}  // namespace shellcontact
