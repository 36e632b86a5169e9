#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "tgan/data.hpp"
#include "tgan/tensor.hpp"

namespace tgan::metrics {

struct GaussianMoments {
  std::array<double, 2> mean{0.0, 0.0};
  std::array<double, 4> cov{0.0, 0.0, 0.0, 0.0};  // row-major 2x2

  static GaussianMoments isotropic(double mx, double my, double variance) {
    return {{mx, my}, {variance, 0.0, 0.0, variance}};
  }
};

// Sample mean and unbiased (n-1) covariance of [n, 2] samples; n >= 2.
GaussianMoments fit_gaussian_moments(const Tensor& samples);

// Closed-form Frechet distance between two planar Gaussians:
//   |mu_a - mu_b|^2 + tr(S_a) + tr(S_b) - 2 tr((S_a S_b)^{1/2}),
// with tr((S_a S_b)^{1/2}) = sqrt(tr(S_a S_b) + 2 sqrt(det(S_a S_b))).
double frechet_distance(const GaussianMoments& a, const GaussianMoments& b);

struct CoverageReport {
  std::size_t modes_covered = 0;
  double hq_fraction = 0.0;
  std::vector<std::size_t> per_mode_counts;  // high-quality samples per center
};

// Each sample goes to its nearest center; it counts as high quality when that
// distance is at most threshold_sigmas * sigma.
CoverageReport mode_coverage(const Tensor& samples, const std::vector<data::Point2>& centers,
                             double threshold_sigmas, double sigma);

// Mean per-sample squared distance between x and L(x).
double identity_deviation(const Tensor& x, const Tensor& lx);

}  // namespace tgan::metrics
