#include <cmath>
#include <numbers>

#include "doctest.h"
#include "pcc/cqed.hpp"
#include "pcc/errors.hpp"

using namespace pcc;

namespace {

CavityFigures golden_cavity() {
  CavityFigures c;
  c.Q = 40000.0;
  c.V_eff_cubic_wavelengths = 0.9;
  c.lambda_c = 852.0;
  c.n = 3.4;
  c.eta = 0.42;
  return c;
}

}  // namespace

TEST_CASE("purcell factor closed-form anchors") {
  const double pi = std::numbers::pi;
  // F_P = 1 exactly when Q = 4 pi^2 / 3 and V = 1 cubic wavelength.
  CHECK(purcell_factor(4.0 * pi * pi / 3.0, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(purcell_factor(56000.0, 0.88) == doctest::Approx(4.84e3).epsilon(0.01));
  // linear in Q, inverse in V
  CHECK(purcell_factor(2.0, 1.0) == doctest::Approx(2.0 * purcell_factor(1.0, 1.0)));
  CHECK(purcell_factor(1.0, 2.0) == doctest::Approx(0.5 * purcell_factor(1.0, 1.0)));
  CHECK_THROWS_AS(purcell_factor(-1.0, 1.0), ConfigError);
}

TEST_CASE("cavity field decay rate from wavelength and Q") {
  // kappa = c / (2 lambda Q)
  CHECK(cavity_decay_kappa(852.0, 40000.0) == doctest::Approx(4.4e9).epsilon(0.01));
  CHECK(cavity_decay_kappa(1616.0, 39500.0) == doctest::Approx(2.35e9).epsilon(0.01));
  CHECK_THROWS_AS(cavity_decay_kappa(852.0, 0.0), ConfigError);
}

TEST_CASE("coupling rate scales as inverse root of mode volume") {
  const AtomSpec atom;
  const double v = 1.0e7;  // nm^3
  const double g1 = coupling_rate_g(atom, v, 1.0);
  const double g2 = coupling_rate_g(atom, 4.0 * v, 1.0);
  CHECK(g1 == doctest::Approx(2.0 * g2).epsilon(1e-12));
  // linear in the overlap factor
  CHECK(coupling_rate_g(atom, v, 0.42) == doctest::Approx(0.42 * g1).epsilon(1e-12));
}

TEST_CASE("critical atom and photon numbers") {
  const auto c = critical_numbers(3.0, 2.0, 0.5);
  CHECK(c.N0 == doctest::Approx(2.0 * 2.0 * 0.5 / 9.0).epsilon(1e-15));
  CHECK(c.m0 == doctest::Approx(0.25 / 18.0).epsilon(1e-15));
}

TEST_CASE("assessment reproduces the golden design point") {
  const StrongCouplingReport r = assess(golden_cavity(), AtomSpec{});
  CHECK(r.kappa == doctest::Approx(4.4e9).epsilon(0.01));
  CHECK(r.g == doctest::Approx(1.7e10).epsilon(0.05));
  CHECK(r.N0 == doctest::Approx(8.4e-5).epsilon(0.10));
  CHECK(r.m0 == doctest::Approx(1.2e-8).epsilon(0.10));
  CHECK(r.F_P == doctest::Approx(3.5e3).epsilon(0.05));
  CHECK(r.strong_coupling);
}

TEST_CASE("product identity of the critical numbers") {
  const StrongCouplingReport r = assess(golden_cavity(), AtomSpec{});
  const double gamma = AtomSpec{}.gamma_perp;
  const double lhs = r.N0 * r.m0;
  const double rhs = r.kappa * gamma * gamma * gamma / std::pow(r.g, 4);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("strong coupling fails once cavity decay overtakes g") {
  CavityFigures weak = golden_cavity();
  weak.Q = 5000.0;  // below the ~1e4 threshold
  const StrongCouplingReport r = assess(weak, AtomSpec{});
  CHECK(r.kappa > r.g);
  CHECK_FALSE(r.strong_coupling);

  // Locate the crossover Q and confirm it sits near 1e4.
  const double g = r.g;  // g does not depend on Q
  const double q_star = kSpeedOfLightNmPerS / (2.0 * 852.0 * g);
  CHECK(q_star == doctest::Approx(1.0e4).epsilon(0.2));
}

TEST_CASE("json parsing of cavity and atom blocks") {
  const json cav = {{"Q", 40000.0}, {"V_eff", 0.9}, {"lambda_c", 852.0}, {"n", 3.4},
                    {"eta", 0.42}};
  const CavityFigures c = CavityFigures::from_json(cav);
  CHECK(c.Q == 40000.0);
  CHECK(c.eta == 0.42);
  json bad = cav;
  bad["eta"] = 1.5;
  CHECK_THROWS_AS(CavityFigures::from_json(bad), ConfigError);
  json missing = cav;
  missing.erase("n");
  CHECK_THROWS_AS(CavityFigures::from_json(missing), ConfigError);

  const AtomSpec a = AtomSpec::from_json({{"lambda0", 852.0}, {"gamma_perp", 2.6e6}});
  CHECK(a.lambda0 == 852.0);
  CHECK_THROWS_AS(AtomSpec::from_json({{"lambda0", -1.0}, {"gamma_perp", 1.0}}), ConfigError);
}

TEST_CASE("mode volume unit conversion") {
  CavityFigures c = golden_cavity();
  const double unit = c.lambda_c / c.n;
  CHECK(c.V_eff_nm3() == doctest::Approx(0.9 * unit * unit * unit).epsilon(1e-15));
}
