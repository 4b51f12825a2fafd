#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

namespace ssr {

// Real dense tensor, row-major (last axis fastest).
class DenseTensor {
public:
  DenseTensor() = default;
  explicit DenseTensor(std::vector<std::size_t> shape, double fill = 0.0);
  DenseTensor(std::vector<std::size_t> shape, std::vector<double> data);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t extent(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return data_.size(); }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }
  double* raw() { return data_.data(); }
  const double* raw() const { return data_.data(); }

  double& operator()(std::initializer_list<std::size_t> idx);
  double operator()(std::initializer_list<std::size_t> idx) const;

  const std::vector<std::string>& labels() const { return labels_; }
  void set_labels(std::vector<std::string> labels);

  DenseTensor reshaped(std::vector<std::size_t> shape) const;
  DenseTensor permuted(const std::vector<int>& order) const;
  double norm() const;
  void require_finite(const char* context) const;

  static DenseTensor identity(std::size_t n);

private:
  std::size_t offset(std::initializer_list<std::size_t> idx) const;

  std::vector<std::size_t> shape_;
  std::vector<double> data_;
  std::vector<std::string> labels_;
};

// Contract the listed (axis of a, axis of b) pairs. Output axes are the free
// axes of a followed by the free axes of b.
DenseTensor contract(const DenseTensor& a, const DenseTensor& b,
                     const std::vector<std::pair<int, int>>& pairs);

struct TruncationPolicy {
  std::size_t max_rank = static_cast<std::size_t>(-1);
  double cutoff = 0.0;  // relative to the largest singular value
  bool renormalize = false;
};

struct SvdResult {
  DenseTensor u;  // left axes..., r
  std::vector<double> singular_values;
  DenseTensor v;  // r, right axes...
  double discarded_weight = 0.0;
};

SvdResult svd_truncate(const DenseTensor& t, const std::vector<int>& left_axes,
                       const TruncationPolicy& policy);

// Matrix form used by the sweep code: row-major rows x cols input,
// u is rows x r, v is r x cols.
struct MatrixSvd {
  std::size_t rank = 0;
  std::vector<double> u;
  std::vector<double> s;
  std::vector<double> v;
  double discarded_weight = 0.0;
};

MatrixSvd svd_truncate_matrix(const double* data, std::size_t rows, std::size_t cols,
                              const TruncationPolicy& policy);

}  // namespace ssr
