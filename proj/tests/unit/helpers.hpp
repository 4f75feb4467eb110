#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <filesystem>
#include <string>

#include "goalcraft/rng.hpp"
#include "goalcraft/tensor.hpp"

namespace gc_test {

inline goalcraft::Tensor random_tensor(std::size_t rows, std::size_t cols, goalcraft::Rng& rng,
                                       double lo = -1.0, double hi = 1.0) {
  goalcraft::Tensor t = goalcraft::Tensor::matrix(rows, cols);
  for (auto& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

/// Fresh empty directory under the build tree.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::path(GOALCRAFT_TEST_TMP) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace gc_test
