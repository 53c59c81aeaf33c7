#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "shellcontact/observables.hpp"
#include "test_support.hpp"

using namespace shellcontact;

namespace {

constexpr double kPi = std::numbers::pi;

/// Field over a flat meridian r_i = i * dr with pressure on [first, last].
struct FlatField {
  Configuration c;
  ContactField f;
  FlatField(std::size_t n, double dr, std::size_t first, std::size_t last) {
    c.r.resize(n);
    c.z.assign(n, 0.0);
    f.pressure.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) c.r[i] = static_cast<double>(i) * dr;
    for (std::size_t i = first; i <= last; ++i) f.pressure[i] = 1000.0;
  }
};

StepRecord record(std::size_t step, Phase phase, double d, double F) {
  StepRecord r;
  r.step = step;
  r.phase = phase;
  r.d = d;
  r.F = F;
  return r;
}

}  // namespace

TEST(Intervals, ApexRunIsADisk) {
  FlatField ff(100, 1e-4, 0, 9);
  const auto iv = contact_intervals(ff.f, ff.c, 1.0);
  ASSERT_EQ(iv.size(), 1u);
  EXPECT_EQ(iv[0].r_in, 0.0);
  EXPECT_TRUE(iv[0].is_disk());
  EXPECT_NEAR(iv[0].r_out, 9.5e-4, 1e-12);  // half a node beyond the last one
}

TEST(Intervals, AnnulusWithinOneNodeSpacing) {
  const double dr = 0.1e-3;
  FlatField ff(200, dr, 50, 70);  // nodes at 5..7 mm
  const auto iv = contact_intervals(ff.f, ff.c, 1.0);
  ASSERT_EQ(iv.size(), 1u);
  EXPECT_NEAR(iv[0].r_in, 5e-3, dr);
  EXPECT_NEAR(iv[0].r_out, 7e-3, dr);
  EXPECT_FALSE(iv[0].is_disk());
}

TEST(Intervals, GapZeroCrossingPlacesTheEdge) {
  FlatField ff(100, 1e-4, 0, 9);
  ff.f.gap.assign(100, 1e-6);
  for (std::size_t i = 0; i <= 9; ++i) ff.f.gap[i] = -1e-6;
  ff.f.gap[10] = 3e-6;  // zero a quarter of the way from node 9 to node 10
  const auto iv = contact_intervals(ff.f, ff.c, 1.0);
  ASSERT_EQ(iv.size(), 1u);
  EXPECT_NEAR(iv[0].r_out, 9.25e-4, 1e-12);
}

TEST(Intervals, DisjointAndOrdered) {
  FlatField ff(100, 1e-4, 0, 5);
  for (std::size_t i = 20; i <= 30; ++i) ff.f.pressure[i] = 500.0;
  const auto iv = contact_intervals(ff.f, ff.c, 1.0);
  ASSERT_EQ(iv.size(), 2u);
  EXPECT_LT(iv[0].r_out, iv[1].r_in);
  EXPECT_EQ(iv[1].first_node, 20u);
  EXPECT_EQ(iv[1].last_node, 30u);
}

TEST(Intervals, EmptyWithoutPressure) {
  FlatField ff(50, 1e-4, 0, 0);
  ff.f.pressure.assign(50, 0.0);
  EXPECT_TRUE(contact_intervals(ff.f, ff.c, 1.0).empty());
  EXPECT_EQ(contact_area({}), 0.0);
}

TEST(Area, DiskAndAnnulus) {
  const double a = 3e-3, r1 = 4e-3, r2 = 6e-3;
  EXPECT_DOUBLE_EQ(contact_area({ContactInterval{0.0, a, 0, 5}}), kPi * a * a);
  EXPECT_DOUBLE_EQ(contact_area({ContactInterval{r1, r2, 10, 20}}), kPi * (r2 * r2 - r1 * r1));
}

TEST(Area, OverlapIsAnError) {
  EXPECT_THROW(contact_area({ContactInterval{0.0, 2e-3, 0, 5}, ContactInterval{1e-3, 3e-3, 3, 9}}),
               InputError);
}

TEST(Area, HalfSphereAreaNormalizesToOne) {
  const ShellModel m = fixtures::default_model();
  StepRecord r;
  r.A = kPi * m.R * m.R / 2.0;
  EXPECT_DOUBLE_EQ(r.Abar(m), 1.0);
}

TEST(SizeLocation, DiskAndAnnulus) {
  const auto disk = contact_size_and_location({ContactInterval{0.0, 3e-3, 0, 5}});
  EXPECT_DOUBLE_EQ(disk.size, 3e-3);
  EXPECT_DOUBLE_EQ(disk.location, 1.5e-3);
  const auto ring = contact_size_and_location({ContactInterval{4e-3, 6e-3, 10, 20}});
  EXPECT_DOUBLE_EQ(ring.size, 2e-3);
  EXPECT_DOUBLE_EQ(ring.location, 5e-3);
  const auto none = contact_size_and_location({});
  EXPECT_EQ(none.size, 0.0);
}

TEST(SizeLocation, DominantIntervalWins) {
  const auto s = contact_size_and_location(
      {ContactInterval{0.0, 0.5e-3, 0, 1}, ContactInterval{4e-3, 6e-3, 10, 20}});
  EXPECT_DOUBLE_EQ(s.size, 2e-3);
  EXPECT_DOUBLE_EQ(s.r_in, 4e-3);
}

TEST(Profile, OnlyContactingNodesWithDeformedRadius) {
  FlatField ff(40, 1e-4, 3, 6);
  const auto prof = pressure_profile(ff.f, ff.c);
  ASSERT_EQ(prof.size(), 4u);
  EXPECT_DOUBLE_EQ(prof.front().r, 3e-4);
  EXPECT_DOUBLE_EQ(prof.back().r, 6e-4);
}

TEST(Normalization, RoundTrip) {
  const ShellModel m = fixtures::default_model();
  StepRecord r;
  r.d = 1.234e-3;
  r.F = 0.0789;
  r.A = 5.6e-5;
  r.p_max = 4321.0;
  EXPECT_NEAR(r.dbar(m) * m.R, r.d, 1e-18);
  EXPECT_NEAR(r.Fbar(m) * m.E * m.h * m.h * m.h / m.R, r.F, 1e-15);
  EXPECT_NEAR(r.Abar(m) * kPi * m.R * m.R / 2.0, r.A, 1e-18);
  EXPECT_NEAR(r.pbar(m) * m.E, r.p_max, 1e-9);
}

TEST(Hysteresis, IdenticalBranchesGiveZero) {
  std::vector<StepRecord> rs;
  for (int k = 0; k <= 10; ++k) rs.push_back(record(k, Phase::load, 1e-4 * k, 0.3 * k * k));
  for (int k = 9; k >= 0; --k) rs.push_back(record(20 - k, Phase::unload, 1e-4 * k, 0.3 * k * k));
  EXPECT_NEAR(hysteresis_energy(rs), 0.0, 1e-15);
}

TEST(Hysteresis, RectangleLoop) {
  // F jumps to 1 N at d = 0, holds over 1 mm, then returns at 0 N.
  std::vector<StepRecord> rs = {record(0, Phase::load, 0.0, 1.0), record(1, Phase::load, 1e-3, 1.0),
                                record(2, Phase::unload, 1e-3, 0.0),
                                record(3, Phase::unload, 0.0, 0.0)};
  EXPECT_NEAR(hysteresis_energy(rs), 1e-3, 1e-15);
}

TEST(Hysteresis, NeedsUnloading) {
  std::vector<StepRecord> rs = {record(0, Phase::load, 0.0, 0.0), record(1, Phase::load, 1e-3, 1.0)};
  EXPECT_THROW(hysteresis_energy(rs), InputError);
}

TEST(Hertz, TwoThirdsExponentAndModulusScaling) {
  const ShellModel m = fixtures::default_model();
  const HertzReference h = hertz_reference(m);
  EXPECT_NEAR(h.area(8.0 * m.F0()) / h.area(m.F0()), 4.0, 1e-12);
  ShellModel stiff = m;
  stiff.E *= 2.0;
  EXPECT_NEAR(hertz_reference(stiff).area(m.F0()) / h.area(m.F0()), std::pow(2.0, -2.0 / 3.0),
              1e-12);
  EXPECT_DOUBLE_EQ(h.E_star, m.E / (1.0 - m.nu * m.nu));
}

TEST(Reissner, DefaultValueAndThicknessScaling) {
  ShellModel m = fixtures::default_model();
  EXPECT_NEAR(reissner_stiffness(m), 281.0, 0.5);
  const double k = reissner_stiffness(m);
  m.h *= 2.0;
  EXPECT_NEAR(reissner_stiffness(m) / k, 4.0, 1e-12);
}

TEST(Parabola, ExactQuadraticFitsPerfectly) {
  std::vector<double> x = {0.0, 0.48, 1.0, 1.4, 1.8, 2.2}, y;
  for (double v : x) y.push_back(0.1 + 2.0 * v - 0.7 * v * v);
  const ParabolaFit f = fit_parabola(x, y);
  EXPECT_NEAR(f.c0, 0.1, 1e-10);
  EXPECT_NEAR(f.c1, 2.0, 1e-10);
  EXPECT_NEAR(f.c2, -0.7, 1e-10);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
  EXPECT_THROW(fit_parabola({0.0, 1.0}, {1.0, 2.0}), InputError);
}
