#pragma once

// Element-by-element accumulation of a scalar potential, its gradient and its
// banded Hessian over the nodal (r, z) unknowns. Elements are visited in index
// order so sums are reproducible bit-for-bit.

#include <array>
#include <cstddef>
#include <vector>

#include "shellcontact/banded.hpp"
#include "shellcontact/jet.hpp"

namespace shellcontact {

/// Unknowns are interleaved per node: (r_i, z_i) -> (2i, 2i+1).
constexpr std::size_t dof_r(std::size_t node) { return 2 * node; }
constexpr std::size_t dof_z(std::size_t node) { return 2 * node + 1; }

/// Elements couple at most three consecutive nodes.
constexpr std::size_t kHalfBandwidth = 5;

enum class EvalMode { value, gradient, hessian };

struct Accumulator {
  EvalMode mode = EvalMode::value;
  double value = 0.0;
  std::vector<double> gradient;
  BandedSymmetricMatrix hessian;

  Accumulator(EvalMode m, std::size_t n_dofs) : mode(m) {
    if (mode != EvalMode::value) gradient.assign(n_dofs, 0.0);
    if (mode == EvalMode::hessian) hessian = BandedSymmetricMatrix(n_dofs, kHalfBandwidth);
  }

  /// Evaluates `kernel` on the K unknowns listed in `dofs` (values in `x`).
  template <std::size_t K, typename Kernel>
  void add(const std::array<std::size_t, K>& dofs, const std::array<double, K>& x,
           Kernel&& kernel) {
    if (mode == EvalMode::value) {
      value += kernel(x);
      return;
    }
    std::array<Jet<K>, K> vars;
    for (std::size_t a = 0; a < K; ++a) vars[a] = Jet<K>::variable(x[a], a);
    const Jet<K> e = kernel(vars);
    value += e.v;
    for (std::size_t a = 0; a < K; ++a) gradient[dofs[a]] += e.g[a];
    if (mode == EvalMode::hessian) {
      for (std::size_t a = 0; a < K; ++a)
        for (std::size_t b = 0; b <= a; ++b) {
          if (dofs[a] == dofs[b] && a != b) {
            hessian.add(dofs[a], dofs[b], 2.0 * e.hess(a, b));
          } else {
            hessian.add(dofs[a], dofs[b], e.hess(a, b));
          }
        }
    }
  }
};

}  // namespace shellcontact
