#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "goalcraft/critic.hpp"
#include "goalcraft/env.hpp"
#include "goalcraft/mlp.hpp"
#include "goalcraft/tensor.hpp"

namespace goalcraft {

struct EigenDecomposition {
  std::vector<double> values;                // descending
  std::vector<std::vector<double>> vectors;  // vectors[k] pairs with values[k]
};

/// Cyclic Jacobi rotations on a symmetric matrix (row-major, n x n).
EigenDecomposition jacobi_eigen(std::span<const double> symmetric, std::size_t n);

struct Pca2D {
  std::vector<double> mean;
  std::array<std::vector<double>, 2> components;
  std::array<double, 2> explained_variance{};

  std::array<double, 2> project(std::span<const double> row) const;
};

/// Top-2 principal axes of the rows of `data` ([n, d], n >= 2, d >= 2).
/// Each component is signed so that its largest-magnitude entry is positive.
Pca2D pca_fit(const Tensor& data);

/// Angle between two non-zero vectors, in degrees.
double angle_deg(std::span<const double> u, std::span<const double> v);

struct FieldSample {
  Vec2 position;
  std::array<double, 2> phi_2d{};
  double phi_norm = 0.0;
  double angle_opt = 0.0;
  double angle_rand = 0.0;
  double q_opt = 0.0;
};

struct FieldScan {
  std::vector<FieldSample> samples;
  /// Empty when every phi in the scan is identical (nothing to project);
  /// phi_2d is then zero for every cell.
  std::optional<Pca2D> pca;
};

/// Grid cell centres ((i + 0.5) / n, (j + 0.5) / n), x index outermost.
std::vector<Vec2> grid_cells(std::size_t grid_n);

/// Embeddings on every free grid cell at zero velocity with a* = pi(s, goal)
/// and a_rand drawn uniformly per cell from `seed`.
FieldScan field_scan(const EnvConfig& env, const CriticSpec& critic, const CriticParams& params,
                     const MlpSpec& actor, const ParamStore& actor_params, Goal goal,
                     std::size_t grid_n, std::uint64_t seed);

struct Heatmap {
  std::size_t grid_n = 0;
  /// values[i * grid_n + j] for cell (i, j); empty inside obstacles.
  std::vector<std::optional<double>> values;
};

/// Q(s, pi(s, goal), goal) per free grid cell.
Heatmap q_heatmap(const EnvConfig& env, const CriticSpec& critic, const CriticParams& params,
                  const MlpSpec& actor, const ParamStore& actor_params, Goal goal,
                  std::size_t grid_n);

}  // namespace goalcraft
