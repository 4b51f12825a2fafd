#include <Eigen/Dense>

#include "ssr/errors.hpp"
#include "ssr/mps.hpp"

namespace ssr {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CMat = Eigen::Map<const RowMat>;
using SMat = Eigen::Map<const RowMat, 0, Eigen::OuterStride<>>;
using Mat = Eigen::Map<RowMat>;

// Slice A[:, s, :] of a (chi_l, d, chi_r) tensor as a chi_l x chi_r matrix.
SMat slice(const DenseTensor& a, std::size_t s) {
  const auto cl = static_cast<Eigen::Index>(a.extent(0));
  const auto cr = static_cast<Eigen::Index>(a.extent(2));
  const auto d = static_cast<Eigen::Index>(a.extent(1));
  return SMat(a.raw() + s * a.extent(2), cl, cr, Eigen::OuterStride<>(d * cr));
}

}  // namespace

DenseTensor initial_environment() { return DenseTensor({1, 1, 1}, 1.0); }

DenseTensor extend_left(const DenseTensor& left, const DenseTensor& a, const DenseTensor* w) {
  const std::size_t b0 = left.extent(0), cl = a.extent(0), d = a.extent(1), cr = a.extent(2);
  if (left.extent(1) != cl || left.extent(2) != cl) throw ShapeError("left environment does not match site");
  const std::size_t b1 = w ? w->extent(1) : 1;
  if (w && (w->extent(0) != b0 || w->extent(2) != d)) throw ShapeError("MPO site does not match environment");
  if (!w && b0 != 1) throw ShapeError("identity environment must have one channel");
  DenseTensor out({b1, cr, cr});
  RowMat p(static_cast<Eigen::Index>(cl), static_cast<Eigen::Index>(cr));
  RowMat q(static_cast<Eigen::Index>(cr), static_cast<Eigen::Index>(cr));
  const auto ecl = static_cast<Eigen::Index>(cl), ecr = static_cast<Eigen::Index>(cr);
  for (std::size_t s = 0; s < d; ++s) {
    SMat as = slice(a, s);
    for (std::size_t w0 = 0; w0 < b0; ++w0) {
      bool used = !w;
      if (w)
        for (std::size_t w1 = 0; w1 < b1 && !used; ++w1) used = w->data()[(w0 * b1 + w1) * d + s] != 0.0;
      if (!used) continue;
      CMat l(left.raw() + w0 * cl * cl, ecl, ecl);
      p.noalias() = l * as;
      q.noalias() = as.transpose() * p;
      for (std::size_t w1 = 0; w1 < b1; ++w1) {
        const double c = w ? w->data()[(w0 * b1 + w1) * d + s] : 1.0;
        if (c == 0.0) continue;
        Mat o(out.raw() + w1 * cr * cr, ecr, ecr);
        o += c * q;
      }
    }
  }
  return out;
}

DenseTensor extend_right(const DenseTensor& right, const DenseTensor& a, const DenseTensor* w) {
  const std::size_t b1 = right.extent(0), cl = a.extent(0), d = a.extent(1), cr = a.extent(2);
  if (right.extent(1) != cr || right.extent(2) != cr) throw ShapeError("right environment does not match site");
  const std::size_t b0 = w ? w->extent(0) : 1;
  if (w && (w->extent(1) != b1 || w->extent(2) != d)) throw ShapeError("MPO site does not match environment");
  if (!w && b1 != 1) throw ShapeError("identity environment must have one channel");
  DenseTensor out({b0, cl, cl});
  RowMat p(static_cast<Eigen::Index>(cl), static_cast<Eigen::Index>(cr));
  RowMat q(static_cast<Eigen::Index>(cl), static_cast<Eigen::Index>(cl));
  const auto ecl = static_cast<Eigen::Index>(cl), ecr = static_cast<Eigen::Index>(cr);
  for (std::size_t s = 0; s < d; ++s) {
    SMat as = slice(a, s);
    for (std::size_t w1 = 0; w1 < b1; ++w1) {
      bool used = !w;
      if (w)
        for (std::size_t w0 = 0; w0 < b0 && !used; ++w0) used = w->data()[(w0 * b1 + w1) * d + s] != 0.0;
      if (!used) continue;
      CMat r(right.raw() + w1 * cr * cr, ecr, ecr);
      p.noalias() = as * r;
      q.noalias() = p * as.transpose();
      for (std::size_t w0 = 0; w0 < b0; ++w0) {
        const double c = w ? w->data()[(w0 * b1 + w1) * d + s] : 1.0;
        if (c == 0.0) continue;
        Mat o(out.raw() + w0 * cl * cl, ecl, ecl);
        o += c * q;
      }
    }
  }
  return out;
}

void Environments::rebuild(const Mps& mps, const MpoSum& terms, int center) {
  const int n_sites = mps.sites();
  if (center < 0 || center >= n_sites) throw DomainError("environment center out of range");
  if (terms.sites() != 0 && (terms.sites() != n_sites || terms.states() != mps.states()))
    throw ShapeError("MPO and MPS dimensions differ");
  const std::size_t nt = terms.terms.size(), nb = static_cast<std::size_t>(n_sites) + 1;
  left.assign(nt, std::vector<DenseTensor>(nb));
  right.assign(nt, std::vector<DenseTensor>(nb));
  identity_left.assign(nb, DenseTensor());
  identity_right.assign(nb, DenseTensor());
  for (std::size_t t = 0; t < nt; ++t) {
    left[t][0] = initial_environment();
    right[t][nb - 1] = initial_environment();
  }
  identity_left[0] = initial_environment();
  identity_right[nb - 1] = initial_environment();
  for (int n = 0; n < center; ++n) update_left(mps, terms, n);
  for (int n = n_sites - 1; n >= center + 2; --n) update_right(mps, terms, n);
}

void Environments::update_left(const Mps& mps, const MpoSum& terms, int n) {
  for (std::size_t t = 0; t < terms.terms.size(); ++t)
    left[t][n + 1] = extend_left(left[t][n], mps.site(n), &terms.terms[t].site(n));
  identity_left[n + 1] = extend_left(identity_left[n], mps.site(n), nullptr);
}

void Environments::update_right(const Mps& mps, const MpoSum& terms, int n) {
  for (std::size_t t = 0; t < terms.terms.size(); ++t)
    right[t][n] = extend_right(right[t][n + 1], mps.site(n), &terms.terms[t].site(n));
  identity_right[n] = extend_right(identity_right[n + 1], mps.site(n), nullptr);
}

}  // namespace ssr
