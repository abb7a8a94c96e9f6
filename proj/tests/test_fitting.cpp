#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "pcc/errors.hpp"
#include "pcc/fitting.hpp"

using namespace pcc;

namespace {

double lorentzian(double x, double xc, double g, double depth, double base) {
  const double hg = 0.5 * g;
  return base - depth * hg * hg / ((x - xc) * (x - xc) + hg * hg);
}

SampleSet dip_samples(double xc, double g, double depth, double base, int n, double span) {
  SampleSet s;
  for (int i = 0; i < n; ++i) {
    const double x = xc - span / 2 + span * i / (n - 1);
    s.x.push_back(x);
    s.y.push_back(lorentzian(x, xc, g, depth, base));
  }
  return s;
}

double gaussian(double x, double c, double fwhm, double amp, double base) {
  const double sigma = fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0)));
  return base + amp * std::exp(-(x - c) * (x - c) / (2 * sigma * sigma));
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

}  // namespace

TEST_CASE("lorentzian dip recovered to 1e-6 from clean data") {
  const SampleSet s = dip_samples(1616.0, 0.047, 0.10, 1.0, 200, 1.0);
  const FitResult r = fit_lorentzian(s);
  CHECK(r.converged);
  CHECK(r.param("lambda_c") == doctest::Approx(1616.0).epsilon(1e-6));
  CHECK(r.param("gamma") == doctest::Approx(0.047).epsilon(1e-6));
  CHECK(r.param("depth") == doctest::Approx(0.10).epsilon(1e-6));
  CHECK(r.param("baseline") == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.rss < 1e-12);
}

TEST_CASE("lorentzian fit rejects flat data") {
  SampleSet s;
  for (int i = 0; i < 50; ++i) {
    s.x.push_back(1600.0 + i * 0.01);
    s.y.push_back(1.0);
  }
  CHECK_THROWS_AS(fit_lorentzian(s), ConfigError);
}

TEST_CASE("lorentzian linewidth robust to 1 percent noise") {
  std::vector<double> gamma_err;
  for (int trial = 0; trial < 100; ++trial) {
    std::mt19937 rng(1000 + trial);
    std::normal_distribution<double> noise(0.0, 0.01);
    SampleSet s = dip_samples(1616.0, 0.047, 0.10, 1.0, 200, 1.0);
    for (double& y : s.y) y += noise(rng);
    const FitResult r = fit_lorentzian(s);
    gamma_err.push_back(std::abs(r.param("gamma") - 0.047) / 0.047);
  }
  CHECK(median(gamma_err) < 0.05);
}

TEST_CASE("lorentzian width matches nonparametric half-depth width") {
  std::mt19937 rng(7);
  std::normal_distribution<double> noise(0.0, 0.002);
  SampleSet s = dip_samples(1616.0, 0.047, 0.10, 1.0, 400, 0.8);
  for (double& y : s.y) y += noise(rng);
  const FitResult r = fit_lorentzian(s);

  // Direct half-depth crossing width from a local smooth of the data.
  std::vector<double> ys(s.y.size());
  for (std::size_t i = 0; i < s.y.size(); ++i) {
    double acc = 0;
    int cnt = 0;
    for (int d = -4; d <= 4; ++d) {
      const long j = static_cast<long>(i) + d;
      if (j >= 0 && j < static_cast<long>(s.y.size())) {
        acc += s.y[j];
        ++cnt;
      }
    }
    ys[i] = acc / cnt;
  }
  const std::size_t imin = std::min_element(ys.begin(), ys.end()) - ys.begin();
  const double base = 0.5 * (ys.front() + ys.back());
  const double half = base - 0.5 * (base - ys[imin]);
  double lo = s.x.front(), hi = s.x.back();
  for (std::size_t i = imin; i > 0; --i)
    if (ys[i - 1] >= half && ys[i] < half) {
      lo = s.x[i - 1] +
           (s.x[i] - s.x[i - 1]) * (ys[i - 1] - half) / (ys[i - 1] - ys[i]);
      break;
    }
  for (std::size_t i = imin; i + 1 < ys.size(); ++i)
    if (ys[i] < half && ys[i + 1] >= half) {
      hi = s.x[i] + (s.x[i + 1] - s.x[i]) * (half - ys[i]) / (ys[i + 1] - ys[i]);
      break;
    }
  CHECK(r.param("gamma") == doctest::Approx(hi - lo).epsilon(0.01));
}

TEST_CASE("lorentzian fit is scale equivariant") {
  const SampleSet s = dip_samples(1616.0, 0.047, 0.10, 1.0, 120, 0.9);
  SampleSet scaled = s;
  for (double& x : scaled.x) x *= 2.0;
  const FitResult r1 = fit_lorentzian(s);
  const FitResult r2 = fit_lorentzian(scaled);
  CHECK(r2.param("lambda_c") == doctest::Approx(2.0 * r1.param("lambda_c")).epsilon(1e-9));
  CHECK(r2.param("gamma") == doctest::Approx(2.0 * r1.param("gamma")).epsilon(1e-7));
  CHECK(r2.param("depth") == doctest::Approx(r1.param("depth")).epsilon(1e-7));
}

TEST_CASE("offset exponential recovered to 1e-6 from clean data") {
  SampleSet s;
  const double gamma0 = 0.041, beta = 0.038, alpha = 0.004;
  for (int i = 0; i < 40; ++i) {
    const double x = 40.0 * i;
    s.x.push_back(x);
    s.y.push_back(gamma0 + beta * std::exp(-alpha * x));
  }
  const FitResult r = fit_exp_offset(s);
  CHECK(r.converged);
  CHECK(r.param("gamma0") == doctest::Approx(gamma0).epsilon(1e-6));
  CHECK(r.param("beta") == doctest::Approx(beta).epsilon(1e-6));
  CHECK(r.param("alpha") == doctest::Approx(alpha).epsilon(1e-6));
}

TEST_CASE("offset exponential flat data falls back to the mean") {
  SampleSet s;
  for (int i = 0; i < 20; ++i) {
    s.x.push_back(50.0 * i);
    s.y.push_back(0.041);
  }
  const FitResult r = fit_exp_offset(s);
  CHECK(r.param("gamma0") == doctest::Approx(0.041).epsilon(1e-12));
  CHECK(std::find(r.flags.begin(), r.flags.end(), "alpha_unidentifiable") != r.flags.end());
}

TEST_CASE("offset exponential from sparse noisy gaps") {
  // Seven gap settings, as in a retraction series, with 0.5% noise.
  const double gamma0 = 0.041, beta = 0.9, alpha = 0.008;
  std::vector<double> err;
  for (int trial = 0; trial < 100; ++trial) {
    std::mt19937 rng(500 + trial);
    std::normal_distribution<double> noise(0.0, 0.005);
    SampleSet s;
    for (double x : {150.0, 300.0, 450.0, 600.0, 750.0, 950.0, 1200.0}) {
      s.x.push_back(x);
      const double y = gamma0 + beta * std::exp(-alpha * x);
      s.y.push_back(y * (1.0 + noise(rng)));
    }
    const FitResult r = fit_exp_offset(s);
    err.push_back(std::abs(r.param("gamma0") - gamma0) / gamma0);
  }
  CHECK(median(err) < 0.03);
}

TEST_CASE("gaussian peak recovered to 1e-6 from clean data") {
  SampleSet s;
  for (int i = 0; i < 101; ++i) {
    const double x = -2000.0 + 40.0 * i;  // nm offsets
    s.x.push_back(x);
    s.y.push_back(gaussian(x, 50.0, 1200.0, 0.093, 0.002));
  }
  const FitResult r = fit_gaussian(s);
  CHECK(r.converged);
  CHECK(r.param("center") == doctest::Approx(50.0).epsilon(1e-6));
  CHECK(r.param("fwhm") == doctest::Approx(1200.0).epsilon(1e-6));
  CHECK(r.param("amplitude") == doctest::Approx(0.093).epsilon(1e-6));
  CHECK(r.param("baseline") == doctest::Approx(0.002).scale(1.0).epsilon(1e-6));
}

TEST_CASE("gaussian fit handles negative-going peaks") {
  SampleSet s;
  for (int i = 0; i < 80; ++i) {
    const double x = -1500.0 + 40.0 * i;
    s.x.push_back(x);
    s.y.push_back(gaussian(x, -120.0, 900.0, -0.05, 1.0));
  }
  const FitResult r = fit_gaussian(s);
  CHECK(r.param("center") == doctest::Approx(-120.0).epsilon(1e-6));
  CHECK(r.param("fwhm") == doctest::Approx(900.0).epsilon(1e-6));
  CHECK(r.param("amplitude") == doctest::Approx(-0.05).epsilon(1e-6));
}

TEST_CASE("gaussian fit on noisy depth-map style scan") {
  std::mt19937 rng(42);
  std::normal_distribution<double> noise(0.0, 0.002);
  SampleSet s;
  for (int i = 0; i < 41; ++i) {
    const double x = -2000.0 + 100.0 * i;
    s.x.push_back(x);
    s.y.push_back(gaussian(x, 0.0, 1200.0, 0.10, 0.0) + noise(rng));
  }
  const FitResult r = fit_gaussian(s);
  CHECK(r.param("fwhm") == doctest::Approx(1200.0).epsilon(0.10));
  // residual well below the peak height
  CHECK(std::sqrt(r.rss / s.x.size()) < 0.1 * 0.10);
}

TEST_CASE("sample validation rejects malformed input") {
  SampleSet s;
  s.x = {1.0, 2.0, 2.0};
  s.y = {0.0, 0.0, 0.0};
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s.x = {1.0, 2.0};
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s.x = {1.0, 2.0, 3.0};
  s.weights = {1.0, -1.0, 1.0};
  CHECK_THROWS_AS(s.validate(), ConfigError);
  SampleSet tiny;
  tiny.x = {1, 2, 3};
  tiny.y = {1, 0, 1};
  CHECK_THROWS_AS(fit_lorentzian(tiny), ConfigError);
}
