#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <string_view>
#include <vector>

#include "tgan/rng.hpp"
#include "tgan/tensor.hpp"

namespace tgan::data {

using Point2 = std::array<double, 2>;

enum class DistributionKind { ring, grid, single_gaussian };

std::string_view to_string(DistributionKind k);
DistributionKind parse_distribution(std::string_view name);

// Uniform mixture of isotropic Gaussians in the plane.
//   ring:            mode_count centers on a circle of `radius`, first at (radius, 0)
//   grid:            grid_side x grid_side lattice with `spacing`, centered at the origin
//   single_gaussian: one mode at the origin
struct DataDistributionSpec {
  DistributionKind kind = DistributionKind::ring;
  std::size_t mode_count = 8;
  std::size_t grid_side = 5;
  double radius = 2.0;
  double spacing = 2.0;
  double sigma = 0.05;

  static constexpr std::size_t data_dim = 2;
};

struct NoiseSpec {
  std::size_t dim = 8;
};

void validate(const DataDistributionSpec& spec);

// [n, dim], i.i.d. standard normal.
Tensor sample_noise(const NoiseSpec& spec, std::size_t n, Rng& rng);
// [n, 2]: uniformly chosen center plus N(0, sigma^2 I).
Tensor sample_data(const DataDistributionSpec& spec, std::size_t n, Rng& rng);
std::vector<Point2> mode_centers(const DataDistributionSpec& spec);

// "x,y" header then one row per sample.
void write_points_csv(const std::filesystem::path& path, const Tensor& points);

}  // namespace tgan::data
