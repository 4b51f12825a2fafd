#include "ssr/mps.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>

#include "ssr/errors.hpp"

namespace ssr {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Map = Eigen::Map<RowMat>;
using CMap = Eigen::Map<const RowMat>;

DenseTensor from_matrix(const RowMat& m, std::size_t a, std::size_t b, std::size_t c) {
  return DenseTensor({a, b, c}, std::vector<double>(m.data(), m.data() + m.size()));
}

}  // namespace

Mps::Mps(std::vector<DenseTensor> sites, std::optional<int> center)
    : sites_(std::move(sites)), center_(center) {
  if (sites_.empty()) throw ShapeError("MPS needs at least one site");
  const std::size_t d = sites_.front().rank() == 3 ? sites_.front().extent(1) : 0;
  for (std::size_t n = 0; n < sites_.size(); ++n) {
    const auto& a = sites_[n];
    if (a.rank() != 3 || a.extent(1) != d || d == 0) throw ShapeError("MPS site tensors must have shape (chi_l, d, chi_r)");
    if (n == 0 && a.extent(0) != 1) throw ShapeError("left MPS boundary must have extent 1");
    if (n + 1 == sites_.size() && a.extent(2) != 1) throw ShapeError("right MPS boundary must have extent 1");
    if (n > 0 && sites_[n - 1].extent(2) != a.extent(0)) throw ShapeError("MPS bond extents disagree");
  }
  if (center_ && (*center_ < 0 || *center_ >= static_cast<int>(sites_.size()))) throw DomainError("orthogonality center out of range");
}

int Mps::bond_dim(int n) const {
  if (n < 0 || n > sites()) throw DomainError("bond index out of range");
  if (n == 0) return 1;
  return static_cast<int>(sites_[n - 1].extent(2));
}

int Mps::max_bond_dim() const {
  int b = 1;
  for (int n = 1; n < sites(); ++n) b = std::max(b, bond_dim(n));
  return b;
}

void Mps::set_site(int n, DenseTensor t) {
  if (t.rank() != 3) throw ShapeError("MPS site tensors must have rank 3");
  sites_.at(static_cast<std::size_t>(n)) = std::move(t);
}

void Mps::shift_center_right(int n) {
  if (n < 0 || n + 1 >= sites()) throw DomainError("cannot move the center right from this site");
  DenseTensor& a = sites_[n];
  const std::size_t cl = a.extent(0), d = a.extent(1), cr = a.extent(2);
  CMap m(a.raw(), static_cast<Eigen::Index>(cl * d), static_cast<Eigen::Index>(cr));
  const Eigen::Index k = std::min<Eigen::Index>(m.rows(), m.cols());
  Eigen::HouseholderQR<RowMat> qr(m);
  RowMat q = qr.householderQ() * RowMat::Identity(m.rows(), k);
  RowMat r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();

  DenseTensor& b = sites_[n + 1];
  const std::size_t d2 = b.extent(1), cr2 = b.extent(2);
  CMap mb(b.raw(), static_cast<Eigen::Index>(cr), static_cast<Eigen::Index>(d2 * cr2));
  RowMat nb = r * mb;
  a = from_matrix(q, cl, d, static_cast<std::size_t>(k));
  b = from_matrix(nb, static_cast<std::size_t>(k), d2, cr2);
  center_ = n + 1;
}

void Mps::shift_center_left(int n) {
  if (n <= 0 || n >= sites()) throw DomainError("cannot move the center left from this site");
  DenseTensor& a = sites_[n];
  const std::size_t cl = a.extent(0), d = a.extent(1), cr = a.extent(2);
  CMap m(a.raw(), static_cast<Eigen::Index>(cl), static_cast<Eigen::Index>(d * cr));
  RowMat mt = m.transpose();
  const Eigen::Index k = std::min<Eigen::Index>(mt.rows(), mt.cols());
  Eigen::HouseholderQR<RowMat> qr(mt);
  RowMat q = qr.householderQ() * RowMat::Identity(mt.rows(), k);
  RowMat r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();

  DenseTensor& b = sites_[n - 1];
  const std::size_t cl2 = b.extent(0), d2 = b.extent(1);
  CMap mb(b.raw(), static_cast<Eigen::Index>(cl2 * d2), static_cast<Eigen::Index>(cl));
  RowMat nb = mb * r.transpose();
  RowMat qt = q.transpose();
  a = from_matrix(qt, static_cast<std::size_t>(k), d, cr);
  b = from_matrix(nb, cl2, d2, static_cast<std::size_t>(k));
  center_ = n - 1;
}

void Mps::move_center_to(int c) {
  if (c < 0 || c >= sites()) throw DomainError("orthogonality center out of range");
  if (!center_) {
    for (int n = 0; n < c; ++n) shift_center_right(n);
    for (int n = sites() - 1; n > c; --n) shift_center_left(n);
    center_ = c;
    return;
  }
  while (*center_ < c) shift_center_right(*center_);
  while (*center_ > c) shift_center_left(*center_);
}

double Mps::norm() const { return std::sqrt(std::max(0.0, overlap(*this, *this))); }

void Mps::normalize() {
  const double nrm = norm();
  if (!(nrm > 0.0) || !std::isfinite(nrm)) throw NumericError("cannot normalize a state with zero or non-finite norm");
  DenseTensor& t = sites_[static_cast<std::size_t>(center_.value_or(0))];
  for (double& x : t.data()) x /= nrm;
}

double Mps::left_orthonormality_error(int n) const {
  const DenseTensor& a = site(n);
  CMap m(a.raw(), static_cast<Eigen::Index>(a.extent(0) * a.extent(1)), static_cast<Eigen::Index>(a.extent(2)));
  RowMat g = m.transpose() * m;
  return (g - RowMat::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

double Mps::right_orthonormality_error(int n) const {
  const DenseTensor& a = site(n);
  CMap m(a.raw(), static_cast<Eigen::Index>(a.extent(0)), static_cast<Eigen::Index>(a.extent(1) * a.extent(2)));
  RowMat g = m * m.transpose();
  return (g - RowMat::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

double Mps::canonical_error() const {
  if (!center_) throw DomainError("state has no orthogonality center");
  double e = 0.0;
  for (int n = 0; n < *center_; ++n) e = std::max(e, left_orthonormality_error(n));
  for (int n = *center_ + 1; n < sites(); ++n) e = std::max(e, right_orthonormality_error(n));
  return e;
}

std::vector<double> Mps::to_dense() const {
  const std::size_t d = static_cast<std::size_t>(states());
  double total = 1.0;
  for (int n = 0; n < sites(); ++n) total *= static_cast<double>(d);
  if (total > static_cast<double>(1u << 24)) throw RefusalError("state too large to expand densely");
  RowMat psi = RowMat::Ones(1, 1);
  for (int n = 0; n < sites(); ++n) {
    const DenseTensor& a = sites_[n];
    CMap m(a.raw(), static_cast<Eigen::Index>(a.extent(0)), static_cast<Eigen::Index>(d * a.extent(2)));
    RowMat next = psi * m;  // (configs, d * chi_r)
    psi = Eigen::Map<RowMat>(next.data(), next.rows() * static_cast<Eigen::Index>(d),
                             static_cast<Eigen::Index>(a.extent(2)));
  }
  return std::vector<double>(psi.data(), psi.data() + psi.size());
}

Mps random_mps(int n_sites, int d, int chi_init, std::uint64_t seed) {
  if (n_sites < 1 || d < 1) throw DomainError("invalid MPS dimensions");
  if (chi_init < 1) throw DomainError("initial bond dimension must be at least 1");
  std::vector<std::size_t> chi(static_cast<std::size_t>(n_sites) + 1, 1);
  for (int n = 1; n < n_sites; ++n) {
    std::size_t left = 1, right = 1;
    for (int i = 0; i < n && left < static_cast<std::size_t>(chi_init); ++i) left *= d;
    for (int i = 0; i < n_sites - n && right < static_cast<std::size_t>(chi_init); ++i) right *= d;
    chi[n] = std::min({static_cast<std::size_t>(chi_init), left, right});
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<DenseTensor> sites;
  for (int n = 0; n < n_sites; ++n) {
    DenseTensor a({chi[n], static_cast<std::size_t>(d), chi[n + 1]});
    for (double& x : a.data()) x = normal(rng);
    sites.push_back(std::move(a));
  }
  Mps mps(std::move(sites));
  mps.move_center_to(0);
  mps.normalize();
  return mps;
}

Mps basis_state_mps(const StackingSequence& seq) {
  const std::size_t d = static_cast<std::size_t>(seq.states());
  std::vector<DenseTensor> sites;
  for (int s : seq.labels()) {
    DenseTensor a({1, d, 1});
    a.data()[static_cast<std::size_t>(s - 1)] = 1.0;
    sites.push_back(std::move(a));
  }
  return Mps(std::move(sites), 0);
}

StackingSequence extract_sequence(const Mps& mps) {
  for (int n = 1; n < mps.sites(); ++n)
    if (mps.bond_dim(n) != 1)
      throw StateNotCollapsedError("bond " + std::to_string(n) + " has extent " + std::to_string(mps.bond_dim(n)));
  std::vector<int> labels;
  for (int n = 0; n < mps.sites(); ++n) {
    const auto& data = mps.site(n).data();
    std::size_t best = 0;
    for (std::size_t s = 1; s < data.size(); ++s)
      if (std::abs(data[s]) > std::abs(data[best])) best = s;
    labels.push_back(static_cast<int>(best) + 1);
  }
  return StackingSequence(std::move(labels), mps.states());
}

double overlap(const Mps& a, const Mps& b) {
  if (a.sites() != b.sites() || a.states() != b.states()) throw ShapeError("states have different dimensions");
  const std::size_t d = static_cast<std::size_t>(a.states());
  RowMat e = RowMat::Ones(1, 1);  // (chi_a, chi_b)
  for (int n = 0; n < a.sites(); ++n) {
    const auto& x = a.site(n);
    const auto& y = b.site(n);
    RowMat next = RowMat::Zero(static_cast<Eigen::Index>(x.extent(2)), static_cast<Eigen::Index>(y.extent(2)));
    for (std::size_t s = 0; s < d; ++s) {
      Eigen::Map<const RowMat, 0, Eigen::OuterStride<>> xs(x.raw() + s * x.extent(2), static_cast<Eigen::Index>(x.extent(0)),
                                                          static_cast<Eigen::Index>(x.extent(2)),
                                                          Eigen::OuterStride<>(static_cast<Eigen::Index>(d * x.extent(2))));
      Eigen::Map<const RowMat, 0, Eigen::OuterStride<>> ys(y.raw() + s * y.extent(2), static_cast<Eigen::Index>(y.extent(0)),
                                                          static_cast<Eigen::Index>(y.extent(2)),
                                                          Eigen::OuterStride<>(static_cast<Eigen::Index>(d * y.extent(2))));
      next.noalias() += xs.transpose() * e * ys;
    }
    e.swap(next);
  }
  return e(0, 0);
}

double expectation(const Mps& mps, const DiagonalMpo& term) {
  if (term.sites() != mps.sites() || term.states() != mps.states())
    throw ShapeError("MPO and MPS dimensions differ");
  DenseTensor env = initial_environment();
  for (int n = 0; n < mps.sites(); ++n) env = extend_left(env, mps.site(n), &term.site(n));
  return env.data()[0];
}

double expectation(const Mps& mps, const MpoSum& terms) {
  double v = 0.0;
  for (const auto& t : terms.terms) v += expectation(mps, t);
  return v;
}

}  // namespace ssr
