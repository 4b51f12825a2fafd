#include "ssr/tensor.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "ssr/errors.hpp"

namespace ssr {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::size_t product(const std::vector<std::size_t>& v) {
  return std::accumulate(v.begin(), v.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const std::vector<std::size_t>& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
  return out + ")";
}

}  // namespace

DenseTensor::DenseTensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), data_(product(shape_), fill) {}

DenseTensor::DenseTensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != product(shape_))
    throw ShapeError("data length " + std::to_string(data_.size()) + " does not match shape " +
                     shape_string(shape_));
}

std::size_t DenseTensor::offset(std::initializer_list<std::size_t> idx) const {
  if (idx.size() != shape_.size()) throw ShapeError("index rank mismatch");
  std::size_t off = 0, axis = 0;
  for (std::size_t i : idx) {
    if (i >= shape_[axis]) throw ShapeError("index out of range");
    off = off * shape_[axis] + i;
    ++axis;
  }
  return off;
}

double& DenseTensor::operator()(std::initializer_list<std::size_t> idx) { return data_[offset(idx)]; }
double DenseTensor::operator()(std::initializer_list<std::size_t> idx) const { return data_[offset(idx)]; }

void DenseTensor::set_labels(std::vector<std::string> labels) {
  if (!labels.empty() && labels.size() != shape_.size()) throw ShapeError("one label per axis required");
  labels_ = std::move(labels);
}

DenseTensor DenseTensor::reshaped(std::vector<std::size_t> shape) const {
  if (product(shape) != data_.size())
    throw ShapeError("cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
  return DenseTensor(std::move(shape), data_);
}

DenseTensor DenseTensor::permuted(const std::vector<int>& order) const {
  const std::size_t r = rank();
  if (order.size() != r) throw ShapeError("permutation rank mismatch");
  std::vector<bool> seen(r, false);
  for (int o : order) {
    if (o < 0 || static_cast<std::size_t>(o) >= r || seen[o]) throw ShapeError("invalid permutation");
    seen[o] = true;
  }
  std::vector<std::size_t> new_shape(r), in_stride(r, 1);
  for (std::size_t i = r; i-- > 1;) in_stride[i - 1] = in_stride[i] * shape_[i];
  for (std::size_t i = 0; i < r; ++i) new_shape[i] = shape_[order[i]];
  DenseTensor out(new_shape);
  if (r == 0) {
    out.data_ = data_;
    return out;
  }
  std::vector<std::size_t> idx(r, 0);
  for (std::size_t k = 0; k < out.data_.size(); ++k) {
    std::size_t src = 0;
    for (std::size_t i = 0; i < r; ++i) src += idx[i] * in_stride[order[i]];
    out.data_[k] = data_[src];
    for (std::size_t i = r; i-- > 0;) {
      if (++idx[i] < new_shape[i]) break;
      idx[i] = 0;
    }
  }
  if (!labels_.empty()) {
    std::vector<std::string> l(r);
    for (std::size_t i = 0; i < r; ++i) l[i] = labels_[order[i]];
    out.labels_ = std::move(l);
  }
  return out;
}

double DenseTensor::norm() const {
  double s = 0.0;
  for (double x : data_) s += x * x;
  return std::sqrt(s);
}

void DenseTensor::require_finite(const char* context) const {
  for (double x : data_)
    if (!std::isfinite(x)) throw NumericError(std::string("non-finite entry in ") + context);
}

DenseTensor DenseTensor::identity(std::size_t n) {
  DenseTensor t({n, n});
  for (std::size_t i = 0; i < n; ++i) t.data_[i * n + i] = 1.0;
  return t;
}

DenseTensor contract(const DenseTensor& a, const DenseTensor& b,
                     const std::vector<std::pair<int, int>>& pairs) {
  const int ra = static_cast<int>(a.rank()), rb = static_cast<int>(b.rank());
  std::vector<bool> used_a(ra, false), used_b(rb, false);
  std::vector<int> pa, pb;
  for (auto [i, j] : pairs) {
    if (i < 0 || i >= ra || j < 0 || j >= rb || used_a[i] || used_b[j])
      throw ShapeError("invalid contraction axis pair");
    if (a.extent(i) != b.extent(j))
      throw ShapeError("contracted extents differ: " + std::to_string(a.extent(i)) + " vs " +
                       std::to_string(b.extent(j)));
    used_a[i] = used_b[j] = true;
    pa.push_back(i);
    pb.push_back(j);
  }
  std::vector<int> order_a, order_b;
  std::vector<std::size_t> out_shape;
  std::size_t m = 1, n = 1, k = 1;
  for (int i = 0; i < ra; ++i)
    if (!used_a[i]) {
      order_a.push_back(i);
      out_shape.push_back(a.extent(i));
      m *= a.extent(i);
    }
  for (int i : pa) {
    order_a.push_back(i);
    k *= a.extent(i);
  }
  order_b = pb;
  for (int j = 0; j < rb; ++j)
    if (!used_b[j]) {
      order_b.push_back(j);
      out_shape.push_back(b.extent(j));
      n *= b.extent(j);
    }
  DenseTensor ap = a.permuted(order_a), bp = b.permuted(order_b);
  DenseTensor out(out_shape);
  Eigen::Map<const RowMat> ma(ap.raw(), m, k);
  Eigen::Map<const RowMat> mb(bp.raw(), k, n);
  Eigen::Map<RowMat> mc(out.raw(), m, n);
  mc.noalias() = ma * mb;
  return out;
}

MatrixSvd svd_truncate_matrix(const double* data, std::size_t rows, std::size_t cols,
                              const TruncationPolicy& policy) {
  if (policy.max_rank < 1) throw DomainError("max_rank must be at least 1");
  if (!(policy.cutoff >= 0.0 && policy.cutoff < 1.0)) throw DomainError("cutoff must lie in [0, 1)");
  for (std::size_t i = 0; i < rows * cols; ++i)
    if (!std::isfinite(data[i])) throw NumericError("non-finite entry in SVD input");

  Eigen::Map<const RowMat> m(data, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const std::size_t full = static_cast<std::size_t>(sv.size());

  double total = 0.0;
  for (std::size_t i = 0; i < full; ++i) total += sv[i] * sv[i];

  std::size_t keep = std::min(full, policy.max_rank);
  if (full == 0 || sv[0] <= 0.0) {
    keep = 1;
  } else {
    std::size_t above = 0;
    while (above < keep && sv[above] / sv[0] >= policy.cutoff) ++above;
    keep = above;
  }
  keep = std::max<std::size_t>(keep, 1);
  keep = std::min(keep, std::max<std::size_t>(full, 1));

  MatrixSvd out;
  out.rank = keep;
  double kept = 0.0;
  for (std::size_t i = 0; i < keep && i < full; ++i) kept += sv[i] * sv[i];
  out.discarded_weight = std::max(0.0, total - kept);
  double scale = 1.0;
  if (policy.renormalize && kept > 0.0) scale = std::sqrt(total / kept);

  out.s.resize(keep, 0.0);
  out.u.assign(rows * keep, 0.0);
  out.v.assign(keep * cols, 0.0);
  for (std::size_t j = 0; j < keep && j < full; ++j) {
    out.s[j] = sv[j] * scale;
    for (std::size_t i = 0; i < rows; ++i) out.u[i * keep + j] = svd.matrixU()(i, j);
    for (std::size_t c = 0; c < cols; ++c) out.v[j * cols + c] = svd.matrixV()(c, j);
  }
  return out;
}

SvdResult svd_truncate(const DenseTensor& t, const std::vector<int>& left_axes,
                       const TruncationPolicy& policy) {
  t.require_finite("svd_truncate");
  const int r = static_cast<int>(t.rank());
  std::vector<bool> is_left(r, false);
  for (int a : left_axes) {
    if (a < 0 || a >= r || is_left[a]) throw ShapeError("invalid left axis");
    is_left[a] = true;
  }
  std::vector<int> order(left_axes.begin(), left_axes.end());
  std::vector<std::size_t> lshape, rshape;
  std::size_t rows = 1, cols = 1;
  for (int a : left_axes) {
    lshape.push_back(t.extent(a));
    rows *= t.extent(a);
  }
  for (int a = 0; a < r; ++a)
    if (!is_left[a]) {
      order.push_back(a);
      rshape.push_back(t.extent(a));
      cols *= t.extent(a);
    }
  DenseTensor p = t.permuted(order);
  MatrixSvd m = svd_truncate_matrix(p.raw(), rows, cols, policy);

  SvdResult out;
  lshape.push_back(m.rank);
  rshape.insert(rshape.begin(), m.rank);
  out.u = DenseTensor(lshape, std::move(m.u));
  out.v = DenseTensor(rshape, std::move(m.v));
  out.singular_values = std::move(m.s);
  out.discarded_weight = m.discarded_weight;
  return out;
}

}  // namespace ssr
