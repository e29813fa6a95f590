#pragma once

// Goodness-of-fit tests used by the distribution audit.

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "forceforge/core.hpp"

namespace forceforge {

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  double dof = 0.0;  // chi-square only
};

// Pearson chi-square against expected category probabilities.
inline TestResult chi_square_test(const std::vector<double>& observed, const std::vector<double>& expected_prob) {
  if (observed.size() != expected_prob.size() || observed.size() < 2)
    throw InvalidArgument("chi-square needs matching observed/expected vectors with >= 2 categories");
  double n = 0.0;
  for (double o : observed) n += o;
  if (!(n > 0.0)) throw InvalidArgument("chi-square needs at least one observation");
  TestResult r;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double e = n * expected_prob[i];
    if (!(e > 0.0)) throw InvalidArgument("chi-square expected counts must be positive");
    r.statistic += (observed[i] - e) * (observed[i] - e) / e;
  }
  r.dof = static_cast<double>(observed.size() - 1);
  r.p_value = boost::math::cdf(boost::math::complement(boost::math::chi_squared(r.dof), r.statistic));
  return r;
}

// Integer samples against the uniform distribution on {lo..hi}. Values
// outside the range make the test fail outright.
inline TestResult chi_square_uniform_int(const std::vector<long long>& samples, long long lo, long long hi) {
  std::vector<double> counts(static_cast<std::size_t>(hi - lo + 1), 0.0);
  for (long long s : samples) {
    if (s < lo || s > hi) return {std::numeric_limits<double>::infinity(), 0.0, static_cast<double>(hi - lo)};
    counts[static_cast<std::size_t>(s - lo)] += 1.0;
  }
  return chi_square_test(counts, std::vector<double>(counts.size(), 1.0 / static_cast<double>(counts.size())));
}

// Asymptotic Kolmogorov distribution tail Q(lambda).
inline double kolmogorov_q(double lambda) {
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

// One-sample Kolmogorov-Smirnov test against Unif[lo, hi), with Stephens'
// small-sample correction of the asymptotic p-value.
inline TestResult ks_uniform(std::vector<double> samples, double lo, double hi) {
  if (samples.empty()) throw InvalidArgument("KS test needs samples");
  if (!(hi > lo)) throw InvalidArgument("KS test needs hi > lo");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = std::clamp((samples[i] - lo) / (hi - lo), 0.0, 1.0);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  const double sn = std::sqrt(n);
  return {d, kolmogorov_q((sn + 0.12 + 0.11 / sn) * d), 0.0};
}

}  // namespace forceforge
