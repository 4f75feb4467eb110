#include "goalcraft/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "goalcraft/error.hpp"
#include "goalcraft/rng.hpp"
#include "goalcraft/trainer.hpp"

namespace goalcraft {

EigenDecomposition jacobi_eigen(std::span<const double> symmetric, std::size_t n) {
  if (symmetric.size() != n * n) throw ShapeError("jacobi_eigen: matrix is not n x n");
  std::vector<double> a(symmetric.begin(), symmetric.end());
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
  auto at = [n](std::vector<double>& m, std::size_t r, std::size_t c) -> double& {
    return m[r * n + c];
  };

  double scale = 0.0;
  for (double x : a) scale = std::max(scale, std::abs(x));

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) off += at(a, p, q) * at(a, p, q);
    }
    if (off <= 1e-30 * scale * scale || off == 0.0) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = at(a, p, q);
        if (apq == 0.0) continue;
        const double theta = (at(a, q, q) - at(a, p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::hypot(theta, 1.0));
        const double c = 1.0 / std::hypot(t, 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = at(a, k, p);
          const double akq = at(a, k, q);
          at(a, k, p) = c * akp - s * akq;
          at(a, k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = at(a, p, k);
          const double aqk = at(a, q, k);
          at(a, p, k) = c * apk - s * aqk;
          at(a, q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = at(v, k, p);
          const double vkq = at(v, k, q);
          at(v, k, p) = c * vkp - s * vkq;
          at(v, k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return at(a, i, i) > at(a, j, j); });
  EigenDecomposition out;
  for (std::size_t k : order) {
    out.values.push_back(at(a, k, k));
    std::vector<double> vec(n);
    for (std::size_t r = 0; r < n; ++r) vec[r] = at(v, r, k);
    out.vectors.push_back(std::move(vec));
  }
  return out;
}

std::array<double, 2> Pca2D::project(std::span<const double> row) const {
  std::array<double, 2> out{};
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t j = 0; j < mean.size(); ++j) out[c] += components[c][j] * (row[j] - mean[j]);
  }
  return out;
}

Pca2D pca_fit(const Tensor& data) {
  if (data.rank() != 2 || data.rows() < 2) throw ContractError("pca_fit needs at least 2 rows");
  const std::size_t n = data.rows();
  const std::size_t d = data.cols();
  if (d < 2) throw ContractError("pca_fit needs at least 2 columns");

  Pca2D pca;
  pca.mean.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) pca.mean[j] += data(i, j);
  }
  for (auto& m : pca.mean) m /= static_cast<double>(n);

  std::vector<double> cov(d * d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double dj = data(i, j) - pca.mean[j];
      for (std::size_t k = j; k < d; ++k) cov[j * d + k] += dj * (data(i, k) - pca.mean[k]);
    }
  }
  double trace = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t k = j; k < d; ++k) {
      cov[j * d + k] /= static_cast<double>(n - 1);
      cov[k * d + j] = cov[j * d + k];
    }
    trace += cov[j * d + j];
  }
  if (!(trace > 0.0)) {
    throw ContractError("pca_fit: data has zero variance (" + std::to_string(n) +
                        " identical rows of width " + std::to_string(d) + ")");
  }

  EigenDecomposition eig = jacobi_eigen(cov, d);
  for (std::size_t c = 0; c < 2; ++c) {
    auto vec = eig.vectors[c];
    const auto big = std::max_element(vec.begin(), vec.end(), [](double x, double y) {
      return std::abs(x) < std::abs(y);
    });
    if (*big < 0.0) {
      for (auto& x : vec) x = -x;
    }
    pca.components[c] = std::move(vec);
    pca.explained_variance[c] = eig.values[c];
  }
  return pca;
}

double angle_deg(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw ShapeError("angle_deg: vectors differ in length");
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (!(nu > 0.0) || !(nv > 0.0)) throw ContractError("angle_deg: zero vector");
  const double c = std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
  return std::acos(c) * 180.0 / std::numbers::pi;
}

std::vector<Vec2> grid_cells(std::size_t grid_n) {
  if (grid_n < 1) throw ContractError("grid size must be >= 1");
  std::vector<Vec2> cells;
  cells.reserve(grid_n * grid_n);
  const double n = static_cast<double>(grid_n);
  for (std::size_t i = 0; i < grid_n; ++i) {
    for (std::size_t j = 0; j < grid_n; ++j) cells.push_back({(i + 0.5) / n, (j + 0.5) / n});
  }
  return cells;
}

namespace {

struct GridInputs {
  std::vector<Vec2> positions;
  std::vector<std::size_t> cell_index;
  Tensor s, g, a_opt;
};

GridInputs grid_inputs(const EnvConfig& env, const MlpSpec& actor, const ParamStore& actor_params,
                       Goal goal, std::size_t grid_n) {
  GridInputs in;
  std::vector<EnvState> states;
  const auto cells = grid_cells(grid_n);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    if (!is_free(env, cells[c])) continue;
    in.positions.push_back(cells[c]);
    in.cell_index.push_back(c);
    states.push_back(EnvState{cells[c], {}});
  }
  if (states.empty()) throw ContractError("no free grid cells");
  std::vector<Goal> goals(states.size(), goal);
  in.s = state_features(env, states);
  in.g = goal_features(goals);
  in.a_opt = actor_actions(actor, actor_params, in.s, in.g, env.a_max);
  return in;
}

}  // namespace

FieldScan field_scan(const EnvConfig& env, const CriticSpec& critic, const CriticParams& params,
                     const MlpSpec& actor, const ParamStore& actor_params, Goal goal,
                     std::size_t grid_n, std::uint64_t seed) {
  if (!is_two_branch(critic.variant)) {
    throw ContractError("field_scan: " + to_string(critic.variant) + " critic has no embeddings");
  }
  GridInputs in = grid_inputs(env, actor, actor_params, goal, grid_n);
  const std::size_t n = in.positions.size();

  Rng rng(seed, "field_scan.a_rand");
  Tensor a_rand = Tensor::matrix(n, kActionDim);
  for (auto& x : a_rand.values()) x = rng.uniform(-env.a_max, env.a_max);

  Embeddings opt = embed(critic, params, in.s, in.a_opt, in.g);
  Embeddings rnd = embed(critic, params, in.s, a_rand, in.g);
  Tensor q_opt = combine_embeddings(critic, params, opt.f, opt.phi);

  FieldScan scan;
  const bool constant_phi = std::all_of(
      opt.phi.values().begin(), opt.phi.values().end(),
      [&, i = std::size_t{0}](const double& x) mutable {
        const std::size_t col = i++ % opt.phi.cols();
        return x == opt.phi(0, col);
      });
  if (!constant_phi) scan.pca = pca_fit(opt.phi);

  for (std::size_t i = 0; i < n; ++i) {
    FieldSample s;
    s.position = in.positions[i];
    if (scan.pca) s.phi_2d = scan.pca->project(opt.phi.row(i));
    double sq = 0.0;
    for (double x : opt.phi.row(i)) sq += x * x;
    s.phi_norm = std::sqrt(sq);
    s.angle_opt = angle_deg(opt.f.row(i), opt.phi.row(i));
    s.angle_rand = angle_deg(rnd.f.row(i), rnd.phi.row(i));
    s.q_opt = q_opt[i];
    scan.samples.push_back(s);
  }
  return scan;
}

Heatmap q_heatmap(const EnvConfig& env, const CriticSpec& critic, const CriticParams& params,
                  const MlpSpec& actor, const ParamStore& actor_params, Goal goal,
                  std::size_t grid_n) {
  GridInputs in = grid_inputs(env, actor, actor_params, goal, grid_n);
  Tensor q = q_value(critic, params, in.s, in.a_opt, in.g);
  Heatmap map;
  map.grid_n = grid_n;
  map.values.assign(grid_n * grid_n, std::nullopt);
  for (std::size_t i = 0; i < in.cell_index.size(); ++i) map.values[in.cell_index[i]] = q[i];
  return map;
}

}  // namespace goalcraft
