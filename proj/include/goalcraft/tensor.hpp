#pragma once

#include <cstddef>
#include <map>
#include <new>
#include <span>
#include <string>
#include <vector>

namespace goalcraft {

/// 64-byte aligned storage. Vectorised kernels pick their code path from the
/// buffer alignment, so a fixed alignment keeps results bit-reproducible.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};

  AlignedAllocator() = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlign)); }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlign); }

  template <class U>
  friend bool operator==(const AlignedAllocator&, const AlignedAllocator<U>&) noexcept {
    return true;
  }
};

/// Dense row-major tensor of doubles.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
  Tensor(std::vector<std::size_t> shape, std::vector<double> values);

  static Tensor matrix(std::size_t rows, std::size_t cols, double fill = 0.0) {
    return Tensor({rows, cols}, fill);
  }

  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  // Rank-2 helpers. A rank-1 tensor is treated as a single column.
  std::size_t rows() const;
  std::size_t cols() const;

  double* data() noexcept { return values_.data(); }
  const double* data() const noexcept { return values_.data(); }
  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols() + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols() + c]; }

  std::span<double> row(std::size_t r) { return {values_.data() + r * cols(), cols()}; }
  std::span<const double> row(std::size_t r) const {
    return {values_.data() + r * cols(), cols()};
  }

  void fill(double v);
  bool all_finite() const noexcept;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double, AlignedAllocator<double>> values_;
};

std::string shape_string(const std::vector<std::size_t>& shape);

/// Concatenate rank-2 tensors with equal row counts along columns.
Tensor concat_cols(std::span<const Tensor* const> parts);

/// Columns [begin, begin + count) of a rank-2 tensor.
Tensor slice_cols(const Tensor& t, std::size_t begin, std::size_t count);

/// Named parameter tensors. std::map keeps iteration order deterministic.
using ParamStore = std::map<std::string, Tensor>;

std::size_t param_count(const ParamStore& store);

/// Throws ShapeError unless both stores have identical names and shapes.
void require_same_layout(const ParamStore& a, const ParamStore& b, const char* what);

/// Largest absolute elementwise difference; stores must share a layout.
double max_abs_diff(const ParamStore& a, const ParamStore& b);

}  // namespace goalcraft
