#pragma once

#include <map>
#include <string>
#include <vector>

#include "pcc/io.hpp"

namespace pcc {

struct SampleSet {
  std::vector<double> x;        // strictly increasing abscissae (nm)
  std::vector<double> y;
  std::vector<double> weights;  // empty = uniform

  void validate() const;  // throws ConfigError
};

struct FitResult {
  std::vector<std::string> names;
  std::vector<double> params;
  std::vector<std::vector<double>> covariance;
  double rss = 0;
  bool converged = false;
  int iterations = 0;
  std::vector<std::string> flags;  // e.g. "alpha_unidentifiable", "span_warning"

  double param(const std::string& name) const;
  json to_json() const;
};

// Lorentzian transmission dip: y = baseline - depth * (g/2)^2 / ((x-x0)^2 + (g/2)^2).
// Parameters: lambda_c, gamma, depth, baseline.
FitResult fit_lorentzian(const SampleSet& samples);

// Offset exponential: y = gamma0 + beta * exp(-alpha * x), gamma0 kept positive.
// Parameters: gamma0, beta, alpha.
FitResult fit_exp_offset(const SampleSet& samples);

// Gaussian peak: y = baseline + amplitude * exp(-(x-center)^2 / (2 sigma^2)).
// Parameters: center, fwhm, amplitude, baseline.
FitResult fit_gaussian(const SampleSet& samples);

}  // namespace pcc
