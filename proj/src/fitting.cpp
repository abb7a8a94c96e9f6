#include "pcc/fitting.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "pcc/errors.hpp"

namespace pcc {

void SampleSet::validate() const {
  if (x.size() != y.size()) throw ConfigError("sample x/y length mismatch");
  if (!weights.empty() && weights.size() != x.size())
    throw ConfigError("sample weights length mismatch");
  for (std::size_t i = 1; i < x.size(); ++i)
    if (!(x[i] > x[i - 1])) throw ConfigError("sample abscissae must be strictly increasing");
  for (double w : weights)
    if (!(w >= 0)) throw ConfigError("sample weights must be non-negative");
}

double FitResult::param(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return params[i];
  throw ConfigError("no fit parameter named '" + name + "'");
}

json FitResult::to_json() const {
  json j;
  json p;
  for (std::size_t i = 0; i < names.size(); ++i) p[names[i]] = params[i];
  j["params"] = p;
  j["covariance"] = covariance;
  j["rss"] = rss;
  j["converged"] = converged;
  j["iterations"] = iterations;
  j["flags"] = flags;
  return j;
}

namespace {

// Model callback fills value and the gradient d(value)/d(param) at one point.
using ModelFn = std::function<double(const Eigen::VectorXd& p, double x, Eigen::VectorXd& grad)>;

FitResult levenberg_marquardt(const SampleSet& s, const std::vector<std::string>& names,
                              Eigen::VectorXd p, const Eigen::VectorXd& lower_bound,
                              const ModelFn& model) {
  const int n = static_cast<int>(s.x.size());
  const int np = static_cast<int>(p.size());
  Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
  if (!s.weights.empty())
    for (int i = 0; i < n; ++i) w[i] = s.weights[i];

  const auto residuals = [&](const Eigen::VectorXd& q, Eigen::VectorXd& r, Eigen::MatrixXd* J) {
    Eigen::VectorXd grad(np);
    for (int i = 0; i < n; ++i) {
      const double f = model(q, s.x[i], grad);
      r[i] = s.y[i] - f;
      if (J) J->row(i) = grad;
    }
  };

  Eigen::VectorXd r(n);
  Eigen::MatrixXd J(n, np);
  residuals(p, r, &J);
  double rss = (w.array() * r.array().square()).sum();

  FitResult result;
  result.names = names;
  double lambda = 1e-3;
  constexpr int kMaxIter = 200;
  constexpr double kRelTol = 1e-12;
  int iter = 0;
  for (; iter < kMaxIter; ++iter) {
    const Eigen::MatrixXd Jw = w.asDiagonal() * J;
    const Eigen::MatrixXd A = J.transpose() * Jw;
    const Eigen::VectorXd g = Jw.transpose() * r;
    bool accepted = false;
    for (int tries = 0; tries < 40 && !accepted; ++tries) {
      Eigen::MatrixXd M = A;
      for (int k = 0; k < np; ++k) M(k, k) += lambda * std::max(A(k, k), 1e-30);
      const Eigen::VectorXd step = M.ldlt().solve(g);
      Eigen::VectorXd q = p + step;
      for (int k = 0; k < np; ++k) q[k] = std::max(q[k], lower_bound[k]);
      Eigen::VectorXd r_new(n);
      residuals(q, r_new, nullptr);
      const double rss_new = (w.array() * r_new.array().square()).sum();
      if (rss_new <= rss && std::isfinite(rss_new)) {
        const double drop = rss - rss_new;
        p = q;
        r = r_new;
        residuals(p, r, &J);
        lambda = std::max(lambda * 0.3, 1e-14);
        accepted = true;
        const double prev = rss;
        rss = rss_new;
        if (drop <= kRelTol * std::max(prev, 1e-300)) {
          result.converged = true;
        }
      } else {
        lambda *= 10.0;
      }
    }
    if (result.converged || !accepted) {
      if (!accepted && rss <= 1e-28) result.converged = true;  // already at machine zero
      break;
    }
  }
  result.iterations = iter + 1;
  result.rss = rss;
  result.params.assign(p.data(), p.data() + np);

  // Gauss-Newton covariance estimate at the solution.
  result.covariance.assign(np, std::vector<double>(np, 0.0));
  if (n > np) {
    const Eigen::MatrixXd A = J.transpose() * (w.asDiagonal() * J);
    const double sigma2 = rss / (n - np);
    const Eigen::MatrixXd cov =
        sigma2 * A.ldlt().solve(Eigen::MatrixXd::Identity(np, np));
    for (int i = 0; i < np; ++i)
      for (int k = 0; k < np; ++k)
        result.covariance[i][k] = 0.5 * (cov(i, k) + cov(k, i));
  }
  return result;
}

double spread(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi - *lo;
}

}  // namespace

FitResult fit_lorentzian(const SampleSet& samples) {
  samples.validate();
  const auto& x = samples.x;
  const auto& y = samples.y;
  if (x.size() < 8) throw ConfigError("lorentzian fit needs >= 8 points spanning the dip");

  // Baseline from the upper quartile, dip from the interior minimum.
  std::vector<double> sorted_y = y;
  std::sort(sorted_y.begin(), sorted_y.end());
  const std::size_t q = std::max<std::size_t>(1, sorted_y.size() / 4);
  double baseline0 = 0;
  for (std::size_t i = sorted_y.size() - q; i < sorted_y.size(); ++i) baseline0 += sorted_y[i];
  baseline0 /= q;
  const std::size_t imin = std::min_element(y.begin(), y.end()) - y.begin();
  const double depth0 = baseline0 - y[imin];
  const double y_scale = std::max(std::abs(baseline0), spread(sorted_y));
  if (imin == 0 || imin + 1 == y.size() || depth0 <= 1e-3 * std::max(y_scale, 1e-300))
    throw ConfigError("no transmission dip detected in sample data");

  // Half-depth crossings bracket the linewidth.
  const double half = baseline0 - 0.5 * depth0;
  double x_lo = x.front(), x_hi = x.back();
  for (std::size_t i = imin; i > 0; --i) {
    if (y[i - 1] >= half && y[i] < half) {
      x_lo = x[i - 1] + (x[i] - x[i - 1]) * (y[i - 1] - half) / (y[i - 1] - y[i]);
      break;
    }
  }
  for (std::size_t i = imin; i + 1 < y.size(); ++i) {
    if (y[i] < half && y[i + 1] >= half) {
      x_hi = x[i] + (x[i + 1] - x[i]) * (half - y[i]) / (y[i + 1] - y[i]);
      break;
    }
  }
  double gamma0 = x_hi - x_lo;
  if (!(gamma0 > 0)) gamma0 = 0.25 * (x.back() - x.front());

  Eigen::VectorXd p(4);
  p << x[imin], gamma0, depth0, baseline0;
  Eigen::VectorXd lb(4);
  const double tiny = 1e-12 * std::max(1.0, x.back() - x.front());
  lb << -std::numeric_limits<double>::infinity(), tiny, 0.0,
      -std::numeric_limits<double>::infinity();

  const ModelFn model = [](const Eigen::VectorXd& q, double xi, Eigen::VectorXd& grad) {
    const double xc = q[0], g = q[1], depth = q[2], base = q[3];
    const double hg = 0.5 * g;
    const double dx = xi - xc;
    const double den = dx * dx + hg * hg;
    const double lor = hg * hg / den;
    grad[0] = -depth * hg * hg * 2.0 * dx / (den * den);
    grad[1] = -depth * (0.5 * hg / den - hg * hg * hg * 0.5 / (den * den)) * 2.0;
    grad[2] = -lor;
    grad[3] = 1.0;
    return base - depth * lor;
  };
  return levenberg_marquardt(samples, {"lambda_c", "gamma", "depth", "baseline"}, p, lb, model);
}

FitResult fit_exp_offset(const SampleSet& samples) {
  samples.validate();
  const auto& x = samples.x;
  const auto& y = samples.y;
  if (x.size() < 6) throw ConfigError("offset-exponential fit needs >= 6 points");

  const double y_mean = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
  const double y_spread = spread(y);
  if (y_spread <= 1e-12 * std::max(std::abs(y_mean), 1e-300)) {
    // Degenerate flat data: offset is the mean, decay unidentifiable.
    FitResult flat;
    flat.names = {"gamma0", "beta", "alpha"};
    flat.params = {y_mean, 0.0, 0.0};
    flat.covariance.assign(3, std::vector<double>(3, 0.0));
    double rss = 0;
    for (double v : y) rss += (v - y_mean) * (v - y_mean);
    flat.rss = rss;
    flat.converged = true;
    flat.flags.push_back("alpha_unidentifiable");
    return flat;
  }

  const double y_min = *std::min_element(y.begin(), y.end());
  double gamma0_init = std::max(y_min - 0.05 * y_spread, 1e-6 * y_spread);
  // Log-linear regression on y - gamma0 for the decay seed.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = y[i] - gamma0_init;
    if (d <= 0) continue;
    const double ly = std::log(d);
    sx += x[i];
    sy += ly;
    sxx += x[i] * x[i];
    sxy += x[i] * ly;
    ++m;
  }
  double alpha0 = 1.0 / std::max(x.back() - x.front(), 1e-300);
  double beta0 = y_spread;
  if (m >= 2 && m * sxx - sx * sx > 0) {
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / m;
    if (slope < 0) {
      alpha0 = -slope;
      beta0 = std::exp(intercept);
    }
  }

  Eigen::VectorXd p(3);
  p << gamma0_init, beta0, alpha0;
  Eigen::VectorXd lb(3);
  lb << 1e-300, -std::numeric_limits<double>::infinity(), 0.0;

  const ModelFn model = [](const Eigen::VectorXd& q, double xi, Eigen::VectorXd& grad) {
    const double e = std::exp(-q[2] * xi);
    grad[0] = 1.0;
    grad[1] = e;
    grad[2] = -q[1] * xi * e;
    return q[0] + q[1] * e;
  };
  FitResult result =
      levenberg_marquardt(samples, {"gamma0", "beta", "alpha"}, p, lb, model);
  const double span = x.back() - x.front();
  if (result.param("alpha") * span < 2.0) result.flags.push_back("identifiability_warning");
  return result;
}

FitResult fit_gaussian(const SampleSet& samples) {
  samples.validate();
  const auto& x = samples.x;
  const auto& y = samples.y;
  if (x.size() < 6) throw ConfigError("gaussian fit needs >= 6 points");

  std::vector<double> sorted_y = y;
  std::sort(sorted_y.begin(), sorted_y.end());
  const double median = sorted_y[sorted_y.size() / 2];
  const std::size_t imax = std::max_element(y.begin(), y.end()) - y.begin();
  const std::size_t imin = std::min_element(y.begin(), y.end()) - y.begin();
  const bool positive = (y[imax] - median) >= (median - y[imin]);
  const std::size_t ipk = positive ? imax : imin;
  const double baseline0 = positive ? sorted_y.front() : sorted_y.back();
  const double amp0 = y[ipk] - baseline0;

  // Width from half-maximum crossings around the peak.
  const double half = baseline0 + 0.5 * amp0;
  double x_lo = x.front(), x_hi = x.back();
  const auto above = [&](std::size_t i) { return positive ? y[i] >= half : y[i] <= half; };
  for (std::size_t i = ipk; i > 0; --i) {
    if (above(i) && !above(i - 1)) {
      x_lo = 0.5 * (x[i - 1] + x[i]);
      break;
    }
  }
  for (std::size_t i = ipk; i + 1 < y.size(); ++i) {
    if (above(i) && !above(i + 1)) {
      x_hi = 0.5 * (x[i] + x[i + 1]);
      break;
    }
  }
  double fwhm0 = x_hi - x_lo;
  if (!(fwhm0 > 0)) fwhm0 = 0.25 * (x.back() - x.front());

  const double kFwhmPerSigma = 2.0 * std::sqrt(2.0 * std::log(2.0));
  Eigen::VectorXd p(4);
  p << x[ipk], fwhm0, amp0, baseline0;
  Eigen::VectorXd lb(4);
  lb << -std::numeric_limits<double>::infinity(),
      1e-12 * std::max(1.0, x.back() - x.front()), -std::numeric_limits<double>::infinity(),
      -std::numeric_limits<double>::infinity();

  const ModelFn model = [kFwhmPerSigma](const Eigen::VectorXd& q, double xi,
                                        Eigen::VectorXd& grad) {
    const double sigma = q[1] / kFwhmPerSigma;
    const double dx = xi - q[0];
    const double e = std::exp(-dx * dx / (2.0 * sigma * sigma));
    grad[0] = q[2] * e * dx / (sigma * sigma);
    grad[1] = q[2] * e * dx * dx / (sigma * sigma * q[1]);
    grad[2] = e;
    grad[3] = 1.0;
    return q[3] + q[2] * e;
  };
  return levenberg_marquardt(samples, {"center", "fwhm", "amplitude", "baseline"}, p, lb, model);
}

}  // namespace pcc
