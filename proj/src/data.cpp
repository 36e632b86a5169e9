#include "tgan/data.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <string>

#include "tgan/error.hpp"

namespace tgan::data {

std::string_view to_string(DistributionKind k) {
  switch (k) {
    case DistributionKind::ring:
      return "ring";
    case DistributionKind::grid:
      return "grid";
    case DistributionKind::single_gaussian:
      return "single_gaussian";
  }
  return "?";
}

DistributionKind parse_distribution(std::string_view name) {
  for (DistributionKind k : {DistributionKind::ring, DistributionKind::grid, DistributionKind::single_gaussian}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown data distribution '" + std::string(name) + "' (expected ring, grid or single_gaussian)");
}

void validate(const DataDistributionSpec& spec) {
  if (!(spec.sigma >= 0.0) || !std::isfinite(spec.sigma)) throw ConfigError("data sigma must be finite and >= 0");
  switch (spec.kind) {
    case DistributionKind::ring:
      if (spec.mode_count == 0) throw ConfigError("ring mode_count must be >= 1");
      if (!(spec.radius > 0.0) || !std::isfinite(spec.radius)) throw ConfigError("ring radius must be > 0");
      break;
    case DistributionKind::grid:
      if (spec.grid_side == 0) throw ConfigError("grid_side must be >= 1");
      if (!(spec.spacing > 0.0) || !std::isfinite(spec.spacing)) throw ConfigError("grid spacing must be > 0");
      break;
    case DistributionKind::single_gaussian:
      break;
  }
}

std::vector<Point2> mode_centers(const DataDistributionSpec& spec) {
  validate(spec);
  std::vector<Point2> centers;
  switch (spec.kind) {
    case DistributionKind::ring: {
      const double m = static_cast<double>(spec.mode_count);
      for (std::size_t i = 0; i < spec.mode_count; ++i) {
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(i) / m;
        centers.push_back({spec.radius * std::cos(angle), spec.radius * std::sin(angle)});
      }
      break;
    }
    case DistributionKind::grid: {
      const double offset = (static_cast<double>(spec.grid_side) - 1.0) / 2.0;
      for (std::size_t i = 0; i < spec.grid_side; ++i) {
        for (std::size_t j = 0; j < spec.grid_side; ++j) {
          centers.push_back({(static_cast<double>(i) - offset) * spec.spacing,
                             (static_cast<double>(j) - offset) * spec.spacing});
        }
      }
      break;
    }
    case DistributionKind::single_gaussian:
      centers.push_back({0.0, 0.0});
      break;
  }
  return centers;
}

Tensor sample_noise(const NoiseSpec& spec, std::size_t n, Rng& rng) {
  if (n == 0 || spec.dim == 0) throw DimensionError("sample_noise needs n >= 1 and dim >= 1");
  Tensor z({n, spec.dim});
  for (double& v : z.values()) v = rng.normal();
  return z;
}

Tensor sample_data(const DataDistributionSpec& spec, std::size_t n, Rng& rng) {
  if (n == 0) throw DimensionError("sample_data needs n >= 1");
  const std::vector<Point2> centers = mode_centers(spec);
  Tensor x({n, DataDistributionSpec::data_dim});
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& c = centers[rng.index(centers.size())];
    x(i, 0) = c[0] + spec.sigma * rng.normal();
    x(i, 1) = c[1] + spec.sigma * rng.normal();
  }
  return x;
}

void write_points_csv(const std::filesystem::path& path, const Tensor& points) {
  require_matrix(points, 2, "write_points_csv");
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << "x,y\n";
  char buf[64];
  for (std::size_t i = 0; i < points.rows(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", points(i, 0), points(i, 1));
    out << buf;
  }
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace tgan::data
