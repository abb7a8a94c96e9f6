#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "doctest.h"
#include "pcc/errors.hpp"
#include "pcc/modes.hpp"

using namespace pcc;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<double> ringdown(double f, double q, std::size_t n, double dt, double amp = 1.0,
                             double phase = 0.3) {
  const double alpha = kPi * f / q;
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = i * dt;
    s[i] = amp * std::exp(-alpha * t) * std::cos(2 * kPi * f * t + phase);
  }
  return s;
}

const ResonantModeEstimate& strongest(const std::vector<ResonantModeEstimate>& modes) {
  REQUIRE(!modes.empty());
  std::size_t best = 0;
  for (std::size_t i = 1; i < modes.size(); ++i)
    if (std::abs(modes[i].amplitude) > std::abs(modes[best].amplitude)) best = i;
  return modes[best];
}

// Uniform-permittivity grid helper for the mode-metric tests.
PermittivityGrid uniform_grid(int n, double spacing, double eps, double n_slab) {
  PermittivityGrid g;
  g.dims = {n, n, n};
  g.spacing = spacing;
  g.a = 425.0;
  g.n_slab = n_slab;
  g.values.assign(g.cell_count(), eps);
  return g;
}

FieldSnapshot snapshot_like(const PermittivityGrid& g, double frequency) {
  FieldSnapshot f;
  f.dims = g.dims;
  f.spacing = g.spacing;
  f.a = g.a;
  f.frequency = frequency;
  f.components["Ex"].assign(g.cell_count(), {0.0, 0.0});
  return f;
}

}  // namespace

TEST_CASE("noiseless ringdown recovered to 0.1 percent") {
  const double f = 0.263, q = 39500.0;
  const auto s = ringdown(f, q, 1 << 16, 1.0);
  const auto modes = harmonic_inversion(s, 1.0, {0.2, 0.32});
  const auto& m = strongest(modes);
  CHECK(m.frequency == doctest::Approx(f).epsilon(1e-3));
  CHECK(m.Q == doctest::Approx(q).epsilon(1e-3));
  CHECK(m.residual < 1e-6);
  CHECK_FALSE(m.q_saturated);
  CHECK(std::abs(m.amplitude) == doctest::Approx(0.5).epsilon(0.05));  // real cosine splits
}

TEST_CASE("ringdown at 40 dB SNR within 5 percent (median over trials)") {
  const double f = 0.263, q = 39500.0;
  std::vector<double> ferr, qerr;
  for (int trial = 0; trial < 15; ++trial) {
    std::mt19937 rng(2000 + trial);
    std::normal_distribution<double> noise(0.0, 0.01);
    auto s = ringdown(f, q, 1 << 16, 1.0);
    for (double& v : s) v += noise(rng);
    const auto modes = harmonic_inversion(s, 1.0, {0.2, 0.32});
    const auto& m = strongest(modes);
    ferr.push_back(std::abs(m.frequency - f) / f);
    qerr.push_back(std::abs(m.Q - q) / q);
  }
  std::sort(ferr.begin(), ferr.end());
  std::sort(qerr.begin(), qerr.end());
  CHECK(ferr[ferr.size() / 2] < 0.05);
  CHECK(qerr[qerr.size() / 2] < 0.05);
}

TEST_CASE("undamped sinusoid saturates the Q cap") {
  std::vector<double> s(1 << 14);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::sin(2 * kPi * 0.263 * i);
  const auto modes = harmonic_inversion(s, 1.0, {0.2, 0.32});
  const auto& m = strongest(modes);
  CHECK(m.q_saturated);
  CHECK(m.Q >= 1e8);
  CHECK(m.frequency == doctest::Approx(0.263).epsilon(1e-4));
}

TEST_CASE("two modes five linewidths apart resolved at 40 dB") {
  const double f1 = 0.25, q1 = 5000.0;
  const double df = 5.0 * f1 / q1;
  const double f2 = f1 + df, q2 = 8000.0;
  std::mt19937 rng(99);
  std::normal_distribution<double> noise(0.0, 0.01);
  auto s = ringdown(f1, q1, 1 << 16, 1.0, 1.0, 0.1);
  const auto s2 = ringdown(f2, q2, 1 << 16, 1.0, 0.8, 1.2);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] += s2[i] + noise(rng);
  const auto modes = harmonic_inversion(s, 1.0, {0.22, 0.28});
  REQUIRE(modes.size() >= 2);
  // find nearest matches
  double bf1 = 0, bq1 = 0, bf2 = 0, bq2 = 0, d1 = 1e9, d2 = 1e9;
  for (const auto& m : modes) {
    if (std::abs(m.frequency - f1) < d1) {
      d1 = std::abs(m.frequency - f1);
      bf1 = m.frequency;
      bq1 = m.Q;
    }
    if (std::abs(m.frequency - f2) < d2) {
      d2 = std::abs(m.frequency - f2);
      bf2 = m.frequency;
      bq2 = m.Q;
    }
  }
  CHECK(bf1 == doctest::Approx(f1).epsilon(0.01));
  CHECK(bf2 == doctest::Approx(f2).epsilon(0.01));
  CHECK(bq1 == doctest::Approx(q1).epsilon(0.10));
  CHECK(bq2 == doctest::Approx(q2).epsilon(0.10));
}

TEST_CASE("band limits exclude out-of-band components") {
  auto s = ringdown(0.263, 20000.0, 1 << 14, 1.0);
  const auto low = ringdown(0.1, 10000.0, 1 << 14, 1.0, 2.0);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] += low[i];
  const auto modes = harmonic_inversion(s, 1.0, {0.2, 0.32});
  for (const auto& m : modes) {
    CHECK(m.frequency >= 0.2);
    CHECK(m.frequency <= 0.32);
  }
  CHECK(strongest(modes).frequency == doctest::Approx(0.263).epsilon(1e-3));
}

TEST_CASE("inversion is consistent under time rescaling") {
  const auto s = ringdown(0.263, 30000.0, 1 << 15, 1.0);
  const auto m1 = strongest(harmonic_inversion(s, 1.0, {0.2, 0.32}));
  // the same samples declared at half the sample interval double the frequency
  const auto m2 = strongest(harmonic_inversion(s, 0.5, {0.4, 0.64}));
  CHECK(m2.frequency == doctest::Approx(2.0 * m1.frequency).epsilon(1e-6));
  CHECK(m2.Q == doctest::Approx(m1.Q).epsilon(1e-3));
}

TEST_CASE("inversion input validation") {
  std::vector<double> tiny(8, 1.0);
  CHECK_THROWS_AS(harmonic_inversion(tiny, 1.0, {0.1, 0.3}), NumericError);
  std::vector<double> s(1024, 1.0);
  CHECK_THROWS_AS(harmonic_inversion(s, 1.0, {0.3, 0.2}), ConfigError);
  CHECK_THROWS_AS(harmonic_inversion(s, 1.0, {0.3, 0.7}), ConfigError);  // beyond Nyquist
  CHECK_THROWS_AS(harmonic_inversion(s, 0.0, {0.1, 0.3}), ConfigError);
}

TEST_CASE("mode volume of a uniform field is the domain volume") {
  const auto g = uniform_grid(10, 50.0, 4.0, 2.0);
  auto f = snapshot_like(g, 0.25);
  for (auto& v : f.components["Ex"]) v = {1.0, 0.0};
  const auto metrics = effective_mode_volume(f, g);
  const double v_domain = g.cell_count() * 50.0 * 50.0 * 50.0;
  CHECK(metrics.V_eff_nm3 == doctest::Approx(v_domain).epsilon(1e-12));
  const double unit = f.wavelength_nm() / g.n_slab;
  CHECK(metrics.V_eff_cubic_wavelengths ==
        doctest::Approx(v_domain / (unit * unit * unit)).epsilon(1e-12));
}

TEST_CASE("mode volume of a separable sine is one eighth of the box") {
  const int n = 21;  // odd: the center cell sits exactly at the antinode
  const auto g = uniform_grid(n, 40.0, 1.0, 1.0);
  auto f = snapshot_like(g, 0.25);
  auto& ex = f.components["Ex"];
  const double L = n * 40.0;
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const double sx = std::sin(kPi * (i + 0.5) * 40.0 / L);
        const double sy = std::sin(kPi * (j + 0.5) * 40.0 / L);
        const double sz = std::sin(kPi * (k + 0.5) * 40.0 / L);
        ex[f.index(i, j, k)] = {sx * sy * sz, 0.0};
      }
  const auto metrics = effective_mode_volume(f, g);
  const double v_domain = g.cell_count() * 40.0 * 40.0 * 40.0;
  CHECK(metrics.V_eff_nm3 == doctest::Approx(v_domain / 8.0).epsilon(1e-6));
  CHECK(metrics.peak_location == std::array<int, 3>{n / 2, n / 2, n / 2});
}

TEST_CASE("field overlap factor eta anchors") {
  // All-air grid: eta is exactly 1 wherever the field peaks.
  const auto air = uniform_grid(6, 50.0, 1.0, 1.0);
  auto f = snapshot_like(air, 0.25);
  for (auto& v : f.components["Ex"]) v = {0.3, 0.4};
  CHECK(eta_factor(f, air) == doctest::Approx(1.0).epsilon(1e-12));

  // Dielectric grid with one air cell carrying half the field intensity.
  const double n_slab = 3.4;
  auto g = uniform_grid(6, 50.0, n_slab * n_slab, n_slab);
  g.values[g.index(0, 0, 0)] = 1.0;
  auto f2 = snapshot_like(g, 0.25);
  for (auto& v : f2.components["Ex"]) v = {1.0, 0.0};
  f2.components["Ex"][g.index(0, 0, 0)] = {std::sqrt(0.5), 0.0};
  CHECK(eta_factor(f2, g) == doctest::Approx(1.0 / (n_slab * std::sqrt(2.0))).epsilon(1e-12));

  // No air cells at all is an error.
  auto solid = uniform_grid(4, 50.0, 11.56, 3.4);
  auto f3 = snapshot_like(solid, 0.25);
  for (auto& v : f3.components["Ex"]) v = {1.0, 0.0};
  CHECK_THROWS_AS(eta_factor(f3, solid), ConfigError);
}

TEST_CASE("quality factor from cold linewidth") {
  CHECK(q_from_linewidth(1616.0, 0.041) == doctest::Approx(39500.0).epsilon(0.01));
  CHECK(q_from_linewidth(1616.0, 0.047) == doctest::Approx(34400.0).epsilon(0.01));
  // exact inverse relation
  CHECK(q_from_linewidth(1616.0, 1616.0 / 25000.0) == doctest::Approx(25000.0).epsilon(1e-12));
  CHECK_THROWS_AS(q_from_linewidth(1616.0, 0.0), ConfigError);
  CHECK_THROWS_AS(q_from_linewidth(-1.0, 0.041), ConfigError);
}

TEST_CASE("fundamental tagging across a radius sweep") {
  auto mode = [](double f, double amp) {
    ResonantModeEstimate m;
    m.frequency = f;
    m.Q = 1e4;
    m.amplitude = {amp, 0.0};
    return m;
  };
  std::vector<SweepPoint> sweep;
  sweep.push_back({0.23, {mode(0.260, 1.0), mode(0.290, 0.5)}});
  sweep.push_back({0.26, {mode(0.266, 1.0), mode(0.297, 0.4)}});
  sweep.push_back({0.29, {mode(0.273, 1.0), mode(0.305, 0.6)}});
  const auto tag = identify_fundamental(sweep);
  CHECK(tag.monotone);
  CHECK_FALSE(tag.ambiguous);
  CHECK(tag.frequencies == std::vector<double>{0.260, 0.266, 0.273});

  // tiny spurious low-frequency components are ignored by the amplitude floor
  std::vector<SweepPoint> with_junk = sweep;
  with_junk[1].spectrum.push_back(mode(0.2, 1e-5));
  CHECK(identify_fundamental(with_junk).frequencies[1] == doctest::Approx(0.266));

  // a non-monotone family is flagged ambiguous
  std::vector<SweepPoint> folded = sweep;
  folded[2].spectrum = {mode(0.261, 1.0)};
  const auto bad = identify_fundamental(folded);
  CHECK_FALSE(bad.monotone);
  CHECK(bad.ambiguous);

  CHECK_THROWS_AS(identify_fundamental({}), ConfigError);
}

TEST_CASE("csv emission lists one row per mode") {
  std::vector<ResonantModeEstimate> modes(2);
  modes[0].frequency = 0.26;
  modes[0].Q = 1e4;
  modes[1].frequency = 0.29;
  modes[1].Q = 2e4;
  const CsvTable t = modes_to_csv(modes);
  CHECK(t.columns.front() == "frequency");
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[1][1] == 2e4);
}
