#include "goalcraft/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "goalcraft/error.hpp"

namespace goalcraft {

namespace {

std::size_t product(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

void check_shape(const std::vector<std::size_t>& shape) {
  for (auto d : shape) {
    if (d == 0) throw ShapeError("tensor dimensions must be positive, got " + shape_string(shape));
  }
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, double fill) : shape_(std::move(shape)) {
  check_shape(shape_);
  values_.assign(product(shape_), fill);
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(values.begin(), values.end()) {
  check_shape(shape_);
  if (product(shape_) != values_.size()) {
    throw ShapeError("shape " + shape_string(shape_) + " does not match " +
                     std::to_string(values_.size()) + " values");
  }
}

std::size_t Tensor::rows() const {
  if (shape_.empty()) return 0;
  return shape_[0];
}

std::size_t Tensor::cols() const {
  if (shape_.size() < 2) return 1;
  return shape_[1];
}

void Tensor::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

bool Tensor::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

std::string shape_string(const std::vector<std::size_t>& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

Tensor concat_cols(std::span<const Tensor* const> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const std::size_t rows = parts[0]->rows();
  std::size_t cols = 0;
  for (const Tensor* p : parts) {
    if (p->rows() != rows) {
      throw ShapeError("concat_cols: row mismatch " + shape_string(p->shape()) + " vs " +
                       std::to_string(rows) + " rows");
    }
    cols += p->cols();
  }
  Tensor out = Tensor::matrix(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    double* dst = out.data() + r * cols;
    for (const Tensor* p : parts) {
      auto src = p->row(r);
      dst = std::copy(src.begin(), src.end(), dst);
    }
  }
  return out;
}

Tensor slice_cols(const Tensor& t, std::size_t begin, std::size_t count) {
  if (begin + count > t.cols()) throw ShapeError("slice_cols: range exceeds " + shape_string(t.shape()));
  Tensor out = Tensor::matrix(t.rows(), count);
  for (std::size_t r = 0; r < t.rows(); ++r) {
    auto src = t.row(r);
    std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(begin), count, out.row(r).begin());
  }
  return out;
}

std::size_t param_count(const ParamStore& store) {
  std::size_t n = 0;
  for (const auto& [name, t] : store) n += t.size();
  return n;
}

void require_same_layout(const ParamStore& a, const ParamStore& b, const char* what) {
  if (a.size() != b.size()) {
    throw ShapeError(std::string(what) + ": tensor count " + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()));
  }
  for (auto ia = a.begin(), ib = b.begin(); ia != a.end(); ++ia, ++ib) {
    if (ia->first != ib->first) {
      throw ShapeError(std::string(what) + ": tensor name '" + ia->first + "' vs '" + ib->first + "'");
    }
    if (ia->second.shape() != ib->second.shape()) {
      throw ShapeError(std::string(what) + ": tensor '" + ia->first + "' shape " +
                       shape_string(ia->second.shape()) + " vs " + shape_string(ib->second.shape()));
    }
  }
}

double max_abs_diff(const ParamStore& a, const ParamStore& b) {
  require_same_layout(a, b, "max_abs_diff");
  double m = 0.0;
  for (auto ia = a.begin(), ib = b.begin(); ia != a.end(); ++ia, ++ib) {
    for (std::size_t i = 0; i < ia->second.size(); ++i) {
      m = std::max(m, std::abs(ia->second[i] - ib->second[i]));
    }
  }
  return m;
}

}  // namespace goalcraft
