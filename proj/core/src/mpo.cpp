#include "ssr/mpo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ssr/errors.hpp"

namespace ssr {

namespace {

bool is_automaton(const std::vector<DenseTensor>& sites) {
  const int n_sites = static_cast<int>(sites.size());
  for (int n = 0; n < n_sites; ++n) {
    const auto& w = sites[n];
    const std::size_t bl = w.extent(0), br = w.extent(1), d = w.extent(2);
    if (n + 1 < n_sites && br < 2) return false;
    for (std::size_t s = 0; s < d; ++s) {
      if (n + 1 < n_sites)
        for (std::size_t i = 0; i < bl; ++i)
          if (w.data()[(i * br + 0) * d + s] != (i == 0 ? 1.0 : 0.0)) return false;
      if (n > 0)
        for (std::size_t j = 0; j < br; ++j)
          if (w.data()[((bl - 1) * br + j) * d + s] != (j == br - 1 ? 1.0 : 0.0)) return false;
    }
  }
  return true;
}

}  // namespace

DiagonalMpo::DiagonalMpo(std::string tag, std::vector<DenseTensor> sites)
    : tag_(std::move(tag)), sites_(std::move(sites)) {
  if (sites_.empty()) throw ShapeError("MPO needs at least one site");
  const std::size_t d = sites_.front().rank() == 3 ? sites_.front().extent(2) : 0;
  for (std::size_t n = 0; n < sites_.size(); ++n) {
    const auto& w = sites_[n];
    if (w.rank() != 3 || w.extent(2) != d) throw ShapeError("MPO site tensors must have shape (bl, br, d)");
    if (n == 0 && w.extent(0) != 1) throw ShapeError("left MPO boundary must have extent 1");
    if (n + 1 == sites_.size() && w.extent(1) != 1) throw ShapeError("right MPO boundary must have extent 1");
    if (n > 0 && sites_[n - 1].extent(1) != w.extent(0)) throw ShapeError("MPO bond extents disagree");
    w.require_finite("MPO site tensor");
  }
  automaton_ = is_automaton(sites_);
}

int DiagonalMpo::bond_dim(int n) const {
  if (n < 0 || n > sites()) throw DomainError("bond index out of range");
  if (n == 0) return 1;
  return static_cast<int>(sites_[n - 1].extent(1));
}

int DiagonalMpo::max_bond_dim() const {
  int b = 1;
  for (int n = 0; n <= sites(); ++n) b = std::max(b, bond_dim(n));
  return b;
}

double DiagonalMpo::evaluate(const std::vector<int>& labels) const {
  if (static_cast<int>(labels.size()) != sites()) throw DomainError("sequence length does not match MPO");
  const int d = states();
  std::vector<double> row{1.0}, next;
  for (int n = 0; n < sites(); ++n) {
    const int s = labels[n];
    if (s < 1 || s > d) throw DomainError("label out of range for MPO");
    const auto& w = sites_[n];
    const std::size_t bl = w.extent(0), br = w.extent(1);
    next.assign(br, 0.0);
    for (std::size_t i = 0; i < bl; ++i) {
      if (row[i] == 0.0) continue;
      for (std::size_t j = 0; j < br; ++j) next[j] += row[i] * w.data()[(i * br + j) * d + (s - 1)];
    }
    row.swap(next);
  }
  return row[0];
}

double DiagonalMpo::evaluate(const StackingSequence& seq) const { return evaluate(seq.labels()); }

double MpoSum::evaluate(const StackingSequence& seq) const {
  double v = 0.0;
  for (const auto& t : terms) v += t.evaluate(seq);
  return v;
}

void MpoSum::add(DiagonalMpo term) {
  if (!terms.empty() && (term.sites() != sites() || term.states() != states()))
    throw ShapeError("MPO terms must share site count and local dimension");
  terms.push_back(std::move(term));
}

Matrix3 quadratic_transfer(double x) {
  const double r = std::numbers::sqrt2 * x;
  return {{{1.0, r, x * x}, {0.0, 1.0, r}, {0.0, 0.0, 1.0}}};
}

Matrix3 multiply(const Matrix3& a, const Matrix3& b) {
  Matrix3 c{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) c[i][j] += a[i][k] * b[k][j];
  return c;
}

DiagonalMpo mpo_from_transfer(std::string tag, int n_sites, int d, int b, const TransferFn& transfer,
                              const std::vector<double>& left, const std::vector<double>& right) {
  if (n_sites < 1 || d < 1 || b < 1) throw DomainError("invalid MPO dimensions");
  if (static_cast<int>(left.size()) != b || static_cast<int>(right.size()) != b)
    throw ShapeError("boundary vectors must match the bond dimension");
  const std::size_t ub = b, ud = d;
  std::vector<DenseTensor> sites;
  std::vector<double> t(ub * ub);
  for (int n = 0; n < n_sites; ++n) {
    const bool first = n == 0, last = n + 1 == n_sites;
    const std::size_t bl = first ? 1 : ub, br = last ? 1 : ub;
    DenseTensor w({bl, br, ud});
    for (int s = 0; s < d; ++s) {
      std::fill(t.begin(), t.end(), 0.0);
      transfer(n, s + 1, t);
      // Fold the boundary vectors into the first and last site.
      for (std::size_t i = 0; i < bl; ++i)
        for (std::size_t j = 0; j < br; ++j) {
          double v = 0.0;
          if (first && last) {
            for (std::size_t p = 0; p < ub; ++p)
              for (std::size_t q = 0; q < ub; ++q) v += left[p] * t[p * ub + q] * right[q];
          } else if (first) {
            for (std::size_t p = 0; p < ub; ++p) v += left[p] * t[p * ub + j];
          } else if (last) {
            for (std::size_t q = 0; q < ub; ++q) v += t[i * ub + q] * right[q];
          } else {
            v = t[i * ub + j];
          }
          w.data()[(i * br + j) * ud + s] = v;
        }
    }
    sites.push_back(std::move(w));
  }
  return DiagonalMpo(std::move(tag), std::move(sites));
}

DiagonalMpo loss_term_mpo(const SsrProblem& problem, Block x, int l) {
  if (l < 1 || l > 4) throw DomainError("lamination parameter index must be 1..4");
  if (problem.symmetric() && x == Block::B) throw DomainError("symmetric problems have no B block");
  const auto& alpha = problem.weights().of(x);
  const double xi = problem.target().at(x, l);
  const AngleSet& angles = problem.angles();
  const int d = problem.states();
  std::vector<std::array<double, 4>> f;
  for (int s = 1; s <= d; ++s) f.push_back(ply_functions(angles, s));
  // Site n carries alpha_n f_l(s_n) - xi / N so that the chain sums to v_l - xi.
  const double share = xi / problem.plies();
  auto transfer = [&](int n, int s, std::vector<double>& t) {
    const Matrix3 m = quadratic_transfer(alpha[n] * f[s - 1][l - 1] - share);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) t[i * 3 + j] = m[i][j];
  };
  return mpo_from_transfer(std::string(block_name(x)) + std::to_string(l), problem.plies(), d, 3, transfer,
                           {1.0, 0.0, 0.0}, {0.0, 0.0, 1.0});
}

DiagonalMpo disorientation_mpo(int n_sites, int d, double gamma,
                               const std::vector<std::pair<int, int>>& violation_pairs) {
  const int b = d + 2;
  std::vector<double> q(static_cast<std::size_t>(d * d), 0.0);  // q[(k-1) d + (s-1)]
  for (auto [k, s] : violation_pairs) {
    if (k < 1 || k > d || s < 1 || s > d) throw DomainError("violation pair label out of range");
    q[(k - 1) * d + (s - 1)] = gamma;
  }
  auto transfer = [&](int, int s, std::vector<double>& t) {
    t[0] = 1.0;
    t[0 * b + s] = 1.0;
    for (int k = 1; k <= d; ++k) t[k * b + (b - 1)] = q[(k - 1) * d + (s - 1)];
    t[(b - 1) * b + (b - 1)] = 1.0;
  };
  std::vector<double> left(b, 0.0), right(b, 0.0);
  left[0] = 1.0;
  right[b - 1] = 1.0;
  return mpo_from_transfer("disorientation", n_sites, d, b, transfer, left, right);
}

DiagonalMpo contiguity_mpo(int n_sites, int d, int k, double gamma) {
  if (k < 2) throw DomainError("contiguity window length must be at least 2");
  const int b = d * (k - 1) + 2;
  auto idx = [d](int block, int label) { return 1 + (block - 1) * d + (label - 1); };
  auto transfer = [&](int, int s, std::vector<double>& t) {
    t[0] = 1.0;
    t[0 * b + idx(1, s)] = 1.0;
    for (int j = 1; j + 1 <= k - 1; ++j) t[idx(j, s) * b + idx(j + 1, s)] = 1.0;
    t[idx(k - 1, s) * b + (b - 1)] = gamma;
    t[(b - 1) * b + (b - 1)] = 1.0;
  };
  std::vector<double> left(b, 0.0), right(b, 0.0);
  left[0] = 1.0;
  right[b - 1] = 1.0;
  return mpo_from_transfer("contiguity", n_sites, d, b, transfer, left, right);
}

DiagonalMpo balanced_mpo(int n_sites, int d, int s, int t, double gamma) {
  if (s == t) throw DomainError("balanced labels must differ");
  if (s < 1 || s > d || t < 1 || t > d) throw DomainError("balanced label out of range");
  auto transfer = [&](int, int label, std::vector<double>& m) {
    const double h = (label == s ? 1.0 : 0.0) - (label == t ? 1.0 : 0.0);
    const Matrix3 q = quadratic_transfer(h);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m[i * 3 + j] = q[i][j];
  };
  return mpo_from_transfer("balanced", n_sites, d, 3, transfer, {1.0, 0.0, 0.0}, {0.0, 0.0, gamma});
}

DiagonalMpo min_count_mpo(int n_sites, int d, int t, int n_t, double gamma) {
  if (t < 1 || t > d) throw DomainError("min_count label out of range");
  if (n_t < 1 || n_t > n_sites) throw DomainError("min_count requires 1 <= N_t <= N");
  const int b = n_t + 1;
  auto transfer = [&](int, int s, std::vector<double>& m) {
    if (s == t) {
      m[0] = 1.0;
      for (int i = 0; i + 1 < b; ++i) m[i * b + i + 1] = 1.0;
    } else {
      for (int i = 0; i < b; ++i) m[i * b + i] = 1.0;
    }
  };
  std::vector<double> left(b, 0.0), right(b, -gamma);
  left[0] = 1.0;
  right[0] = gamma * n_t;
  return mpo_from_transfer("min_count", n_sites, d, b, transfer, left, right);
}

DiagonalMpo penalty_mpo(const SsrProblem& problem, const ConstraintSpec& spec) {
  const int n = problem.plies(), d = problem.states();
  if (const auto* x = std::get_if<Disorientation>(&spec))
    return disorientation_mpo(n, d, x->gamma, disorientation_violation_pairs(problem.angles(), x->max_delta_deg));
  if (const auto* x = std::get_if<Contiguity>(&spec)) return contiguity_mpo(n, d, x->max_same + 1, x->gamma);
  if (const auto* x = std::get_if<Balanced>(&spec)) return balanced_mpo(n, d, x->s, x->t, x->gamma);
  const auto& m = std::get<MinCount>(spec);
  return min_count_mpo(n, d, m.t, m.n_t, m.gamma);
}

MpoSum loss_mpo_sum(const SsrProblem& problem, bool include_penalties) {
  MpoSum sum;
  for (Block x : problem.target().blocks())
    for (int l = 1; l <= 4; ++l) sum.add(loss_term_mpo(problem, x, l));
  if (include_penalties)
    for (const auto& c : problem.constraints()) sum.add(penalty_mpo(problem, c));
  return sum;
}

DiagonalMpo stack_block_diagonal(const MpoSum& sum) {
  if (sum.terms.empty()) throw DomainError("cannot stack an empty MPO sum");
  const int n_sites = sum.sites();
  const std::size_t d = static_cast<std::size_t>(sum.states());
  std::vector<DenseTensor> sites;
  for (int n = 0; n < n_sites; ++n) {
    std::size_t bl = 0, br = 0;
    for (const auto& t : sum.terms) {
      bl += t.site(n).extent(0);
      br += t.site(n).extent(1);
    }
    if (n == 0) bl = 1;
    if (n + 1 == n_sites) br = 1;
    DenseTensor w({bl, br, d});
    std::size_t oi = 0, oj = 0;
    for (const auto& t : sum.terms) {
      const auto& src = t.site(n);
      const std::size_t tl = src.extent(0), tr = src.extent(1);
      for (std::size_t i = 0; i < tl; ++i)
        for (std::size_t j = 0; j < tr; ++j)
          for (std::size_t s = 0; s < d; ++s)
            w.data()[((oi + i) * br + (oj + j)) * d + s] += src.data()[(i * tr + j) * d + s];
      if (n != 0) oi += tl;
      if (n + 1 != n_sites) oj += tr;
    }
    sites.push_back(std::move(w));
  }
  return DiagonalMpo("stacked", std::move(sites));
}

}  // namespace ssr
