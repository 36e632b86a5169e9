#include "tgan/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "tgan/error.hpp"
#include "tgan/kernels.hpp"
#include "tgan/objectives.hpp"

namespace tgan::metrics {

namespace {

bool finite_moments(const GaussianMoments& m) {
  return std::all_of(m.mean.begin(), m.mean.end(), [](double v) { return std::isfinite(v); }) &&
         std::all_of(m.cov.begin(), m.cov.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace

GaussianMoments fit_gaussian_moments(const Tensor& samples) {
  require_matrix(samples, 2, "fit_gaussian_moments");
  const std::size_t n = samples.rows();
  if (n < 2) throw DimensionError("fit_gaussian_moments needs at least 2 samples, got " + std::to_string(n));
  GaussianMoments m;
  for (std::size_t i = 0; i < n; ++i) {
    m.mean[0] += samples(i, 0);
    m.mean[1] += samples(i, 1);
  }
  m.mean[0] /= static_cast<double>(n);
  m.mean[1] /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = samples(i, 0) - m.mean[0];
    const double dy = samples(i, 1) - m.mean[1];
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  const double denom = static_cast<double>(n - 1);
  m.cov = {sxx / denom, sxy / denom, sxy / denom, syy / denom};
  return m;
}

double frechet_distance(const GaussianMoments& a, const GaussianMoments& b) {
  if (!finite_moments(a) || !finite_moments(b)) throw NonFiniteError("frechet_distance: non-finite moments");
  const double dx = a.mean[0] - b.mean[0];
  const double dy = a.mean[1] - b.mean[1];
  const auto& A = a.cov;
  const auto& B = b.cov;
  // Trace and determinant of the product A*B.
  const double tr_ab = A[0] * B[0] + A[1] * B[2] + A[2] * B[1] + A[3] * B[3];
  double det_ab = (A[0] * A[3] - A[1] * A[2]) * (B[0] * B[3] - B[1] * B[2]);
  if (det_ab < 0.0) {
    std::cerr << "warning: frechet_distance clamped negative det(S_a S_b) = " << det_ab << " to 0\n";
    det_ab = 0.0;
  }
  const double inner = std::max(0.0, tr_ab + 2.0 * std::sqrt(det_ab));
  const double dist = dx * dx + dy * dy + (A[0] + A[3]) + (B[0] + B[3]) - 2.0 * std::sqrt(inner);
  return std::max(0.0, dist);
}

CoverageReport mode_coverage(const Tensor& samples, const std::vector<data::Point2>& centers,
                             double threshold_sigmas, double sigma) {
  require_matrix(samples, 2, "mode_coverage");
  if (centers.empty()) throw DimensionError("mode_coverage needs at least one center");
  if (!(sigma > 0.0)) throw ConfigError("mode_coverage needs sigma > 0");
  const std::size_t n = samples.rows();
  std::vector<double> flat;
  flat.reserve(centers.size() * 2);
  for (const auto& c : centers) flat.insert(flat.end(), c.begin(), c.end());
  std::vector<std::size_t> nearest(n);
  std::vector<double> dist2(n);
  kernels::nearest_center(samples.values(), flat, nearest, dist2);

  const double radius = threshold_sigmas * sigma;
  CoverageReport report;
  report.per_mode_counts.assign(centers.size(), 0);
  std::size_t hq = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::sqrt(dist2[i]) <= radius) {
      ++report.per_mode_counts[nearest[i]];
      ++hq;
    }
  }
  report.modes_covered = static_cast<std::size_t>(
      std::count_if(report.per_mode_counts.begin(), report.per_mode_counts.end(), [](std::size_t c) { return c > 0; }));
  report.hq_fraction = static_cast<double>(hq) / static_cast<double>(n);
  return report;
}

double identity_deviation(const Tensor& x, const Tensor& lx) { return objectives::reconstruction_loss(x, lx); }

}  // namespace tgan::metrics
