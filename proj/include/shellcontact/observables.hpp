#pragma once

// Everything that is reported per step: contact morphology, pressure profile,
// normalized variables, regime labels, hysteresis and closed-form references.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "shellcontact/contact.hpp"
#include "shellcontact/errors.hpp"
#include "shellcontact/geometry.hpp"
#include "shellcontact/mechanics.hpp"

namespace shellcontact {

enum class Regime { none, hertzian, intermediate, buckled };
enum class Phase { load, unload };

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::none: return "none";
    case Regime::hertzian: return "H";
    case Regime::intermediate: return "I";
    case Regime::buckled: return "B";
  }
  return "?";
}

inline const char* to_string(Phase p) { return p == Phase::load ? "load" : "unload"; }

struct ContactInterval {
  double r_in = 0.0;
  double r_out = 0.0;
  std::size_t first_node = 0;
  std::size_t last_node = 0;

  double area() const { return std::numbers::pi * (r_out * r_out - r_in * r_in); }
  double width() const { return r_out - r_in; }
  bool is_disk() const { return first_node == 0; }
};

struct PressureSample {
  double r = 0.0;
  double p = 0.0;
};

struct StepRecord {
  std::size_t step = 0;
  Phase phase = Phase::load;
  double d = 0.0;
  double F = 0.0;
  double A = 0.0;
  double p_max = 0.0;
  double p_mean = 0.0;
  std::vector<ContactInterval> intervals;
  double r_in = 0.0;
  double r_out = 0.0;
  double size = 0.0;
  double location = 0.0;
  bool apex_in_contact = false;
  Regime regime = Regime::none;
  /// Cumulative friction dissipation (J).
  double D = 0.0;
  std::size_t substeps = 1;
  bool stabilized = false;
  std::size_t newton_iterations = 0;
  /// Energy bookkeeping (J): elastic, contact storage, cumulative plate work.
  double elastic_energy = 0.0;
  double contact_storage = 0.0;
  double plate_work = 0.0;
  /// Plate work increment minus stored and dissipated increments for this step.
  double audit_residual = 0.0;

  // Normalized forms.
  double dbar(const ShellModel& m) const { return d / m.R; }
  double Fbar(const ShellModel& m) const { return F * m.R / (m.E * m.h * m.h * m.h); }
  double Abar(const ShellModel& m) const { return 2.0 * A / (std::numbers::pi * m.R * m.R); }
  double pbar(const ShellModel& m) const { return p_max / m.E; }
};

/// Maximal runs of nodes with p > p_tol, mapped to deformed radii. Interval
/// edges sit where the gap interpolated linearly between the last contacting
/// node and its free neighbour crosses zero; without gap data they sit
/// halfway to that neighbour.
inline std::vector<ContactInterval> contact_intervals(const ContactField& field,
                                                      const Configuration& c, double p_tol) {
  std::vector<ContactInterval> out;
  const std::size_t n = field.pressure.size();
  const bool have_gap = field.gap.size() == n;
  auto edge = [&](std::size_t in, std::size_t free) {
    double t = 0.5;
    if (have_gap) {
      const double gi = field.gap[in], gf = field.gap[free];
      if (gi < 0.0 && gf > gi) t = std::clamp(gi / (gi - gf), 0.0, 1.0);
    }
    return c.r[in] + t * (c.r[free] - c.r[in]);
  };
  std::size_t i = 0;
  while (i < n) {
    if (!(field.pressure[i] > p_tol)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < n && field.pressure[j + 1] > p_tol) ++j;
    ContactInterval iv;
    iv.first_node = i;
    iv.last_node = j;
    iv.r_in = i == 0 ? 0.0 : edge(i, i - 1);
    iv.r_out = j + 1 < n ? edge(j, j + 1) : c.r[j];
    if (iv.r_out < iv.r_in) std::swap(iv.r_in, iv.r_out);
    out.push_back(iv);
    i = j + 1;
  }
  std::sort(out.begin(), out.end(),
            [](const ContactInterval& a, const ContactInterval& b) { return a.r_in < b.r_in; });
  return out;
}

inline double contact_area(const std::vector<ContactInterval>& intervals) {
  double a = 0.0;
  for (std::size_t k = 0; k < intervals.size(); ++k) {
    if (k > 0 && intervals[k].r_in < intervals[k - 1].r_out)
      throw InputError("contact intervals overlap");
    a += intervals[k].area();
  }
  return a;
}

/// Pressure against deformed radius over the contacting nodes.
inline std::vector<PressureSample> pressure_profile(const ContactField& field,
                                                    const Configuration& c) {
  std::vector<PressureSample> out;
  for (std::size_t i = 0; i < field.pressure.size(); ++i)
    if (field.pressure[i] > 0.0) out.push_back({c.r[i], field.pressure[i]});
  return out;
}

struct SizeAndLocation {
  double size = 0.0;
  double location = 0.0;
  double r_in = 0.0;
  double r_out = 0.0;
};

/// Disk: size is the radius. Otherwise the largest-area interval gives the
/// width and mid-radius.
inline SizeAndLocation contact_size_and_location(const std::vector<ContactInterval>& intervals) {
  if (intervals.empty()) return {};
  if (intervals.size() == 1 && intervals.front().r_in == 0.0) {
    const auto& iv = intervals.front();
    return {iv.r_out, 0.5 * iv.r_out, 0.0, iv.r_out};
  }
  const auto dominant = std::max_element(
      intervals.begin(), intervals.end(),
      [](const ContactInterval& a, const ContactInterval& b) { return a.area() < b.area(); });
  return {dominant->width(), 0.5 * (dominant->r_in + dominant->r_out), dominant->r_in,
          dominant->r_out};
}

/// Loop integral of F over d around a load/unload cycle (trapezoidal).
inline double hysteresis_energy(const std::vector<StepRecord>& records) {
  bool has_unload = false;
  for (const auto& r : records) has_unload |= r.phase == Phase::unload;
  if (!has_unload) throw InputError("hysteresis needs an unloading branch");
  double w = 0.0;
  for (std::size_t k = 1; k < records.size(); ++k)
    w += 0.5 * (records[k].F + records[k - 1].F) * (records[k].d - records[k - 1].d);
  return w;
}

/// Rigid plate on an elastic sphere: A(F) = pi (3 F R / (4 E*))^(2/3).
struct HertzReference {
  double R = 0.0;
  double E_star = 0.0;

  double contact_radius(double F) const { return std::cbrt(3.0 * F * R / (4.0 * E_star)); }
  double area(double F) const {
    const double a = contact_radius(F);
    return std::numbers::pi * a * a;
  }
};

inline HertzReference hertz_reference(const ShellModel& m) {
  return {m.R, m.E / (1.0 - m.nu * m.nu)};
}

/// Shallow-shell point-load stiffness 4 E h^2 / (R sqrt(3 (1 - nu^2))).
inline double reissner_stiffness(const ShellModel& m) {
  return 4.0 * m.E * m.h * m.h / (m.R * std::sqrt(3.0 * (1.0 - m.nu * m.nu)));
}

/// Least-squares parabola y = c0 + c1 x + c2 x^2 with its coefficient of
/// determination.
struct ParabolaFit {
  double c0 = 0.0, c1 = 0.0, c2 = 0.0;
  double r_squared = 0.0;
  double operator()(double x) const { return c0 + c1 * x + c2 * x * x; }
};

inline ParabolaFit fit_parabola(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 3) throw InputError("parabola fit needs >= 3 points");
  // Normal equations on centred, scaled abscissae for conditioning.
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double scale = 0.0;
  for (double v : x) scale = std::max(scale, std::abs(v - mean));
  if (scale == 0.0) throw InputError("parabola fit needs distinct abscissae");
  double S[5] = {0, 0, 0, 0, 0}, T[3] = {0, 0, 0};
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double u = (x[k] - mean) / scale;
    double p = 1.0;
    for (int e = 0; e < 5; ++e) {
      S[e] += p;
      if (e < 3) T[e] += p * y[k];
      p *= u;
    }
  }
  // Solve the 3x3 system by Cramer's rule.
  const double M[3][3] = {{S[0], S[1], S[2]}, {S[1], S[2], S[3]}, {S[2], S[3], S[4]}};
  auto det3 = [](const double A[3][3]) {
    return A[0][0] * (A[1][1] * A[2][2] - A[1][2] * A[2][1]) -
           A[0][1] * (A[1][0] * A[2][2] - A[1][2] * A[2][0]) +
           A[0][2] * (A[1][0] * A[2][1] - A[1][1] * A[2][0]);
  };
  const double det = det3(M);
  if (std::abs(det) < 1e-300) throw InputError("parabola fit is singular");
  double b[3];
  for (int col = 0; col < 3; ++col) {
    double A[3][3];
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) A[r][c] = c == col ? T[r] : M[r][c];
    b[col] = det3(A) / det;
  }
  // Back to the original abscissa: u = (x - mean) / scale.
  ParabolaFit f;
  const double s2 = scale * scale;
  f.c2 = b[2] / s2;
  f.c1 = b[1] / scale - 2.0 * b[2] * mean / s2;
  f.c0 = b[0] - b[1] * mean / scale + b[2] * mean * mean / s2;
  double ybar = 0.0;
  for (double v : y) ybar += v;
  ybar /= static_cast<double>(y.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double u = (x[k] - mean) / scale;
    const double pred = b[0] + b[1] * u + b[2] * u * u;
    ss_res += (y[k] - pred) * (y[k] - pred);
    ss_tot += (y[k] - ybar) * (y[k] - ybar);
  }
  f.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return f;
}

}  // namespace shellcontact
