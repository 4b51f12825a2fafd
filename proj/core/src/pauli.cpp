#include "ssr/pauli.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <unordered_map>

#include "ssr/errors.hpp"

namespace ssr {

namespace {

constexpr std::array<std::array<int, 2>, 4> kCodes{{{0, 0}, {0, 1}, {1, 1}, {1, 0}}};

void require_four(int d) {
  if (d != 4) throw UnsupportedError("qubit encoding is defined for d = 4 only");
}

// Support key: up to four qubit indices, each stored +1 in 16 bits.
using Key = std::uint64_t;

Key make_key(std::vector<int> q) {
  std::sort(q.begin(), q.end());
  Key k = 0;
  for (int i : q) k = (k << 16) | static_cast<Key>(i + 1);
  return k;
}

std::vector<int> key_support(Key k) {
  std::vector<int> out;
  while (k) {
    out.push_back(static_cast<int>(k & 0xffff) - 1);
    k >>= 16;
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Walsh coefficients of a single-ply function over the subsets
// {}, {a}, {b}, {a, b} of its two qubits (index bit 0 = a, bit 1 = b).
std::array<double, 4> walsh1(const std::array<double, 4>& g) {
  std::array<double, 4> c{};
  for (int m = 0; m < 4; ++m)
    for (int s = 0; s < 4; ++s) {
      const int parity = ((m & 1) ? kCodes[s][0] : 0) ^ ((m & 2) ? kCodes[s][1] : 0);
      c[m] += 0.25 * g[s] * (parity ? -1.0 : 1.0);
    }
  return c;
}

std::vector<int> subset_qubits(int ply, int mask) {
  std::vector<int> q;
  if (mask & 1) q.push_back(2 * ply);
  if (mask & 2) q.push_back(2 * ply + 1);
  return q;
}

class Accumulator {
public:
  void add(const std::vector<int>& support, double c) {
    if (c == 0.0) return;
    if (support.empty()) {
      offset += c;
      return;
    }
    map_[make_key(support)] += c;
  }

  PauliExpansion finish(int num_qubits) const {
    PauliExpansion out;
    out.num_qubits = num_qubits;
    out.offset = offset;
    for (const auto& [k, c] : map_)
      if (std::abs(c) > kPauliDropTol) out.terms.push_back({key_support(k), c});
    std::sort(out.terms.begin(), out.terms.end(), [](const PauliZTerm& a, const PauliZTerm& b) {
      if (a.support.size() != b.support.size()) return a.support.size() < b.support.size();
      return a.support < b.support;
    });
    return out;
  }

  double offset = 0.0;

private:
  std::unordered_map<Key, double> map_;
};

}  // namespace

std::vector<int> encode(const StackingSequence& seq) {
  require_four(seq.states());
  std::vector<int> bits;
  for (int s : seq.labels()) {
    bits.push_back(kCodes[s - 1][0]);
    bits.push_back(kCodes[s - 1][1]);
  }
  return bits;
}

std::string encode_string(const StackingSequence& seq) {
  std::string out;
  for (int b : encode(seq)) out += static_cast<char>('0' + b);
  return out;
}

StackingSequence decode(const std::vector<int>& bits) {
  if (bits.empty() || bits.size() % 2 != 0) throw DomainError("bitstring length must be a positive even number");
  std::vector<int> labels;
  for (std::size_t i = 0; i < bits.size(); i += 2) {
    int found = 0;
    for (int s = 0; s < 4; ++s)
      if (kCodes[s][0] == bits[i] && kCodes[s][1] == bits[i + 1]) found = s + 1;
    if (!found) throw DomainError("bits must be 0 or 1");
    labels.push_back(found);
  }
  return StackingSequence(std::move(labels), 4);
}

double PauliExpansion::eigenvalue(const std::vector<int>& bits) const {
  if (static_cast<int>(bits.size()) != num_qubits) throw ShapeError("bitstring length does not match the qubit count");
  double v = offset;
  for (const auto& t : terms) {
    int parity = 0;
    for (int q : t.support) parity ^= bits[static_cast<std::size_t>(q)];
    v += parity ? -t.coefficient : t.coefficient;
  }
  return v;
}

PauliExpansion pauli_expand(const SsrProblem& problem, bool include_disorientation) {
  require_four(problem.states());
  const int n = problem.plies();
  if (2 * n >= 0xffff) throw UnsupportedError("too many plies for the Pauli expansion");
  Accumulator acc;

  std::array<std::array<double, 4>, 4> f{};
  for (int s = 1; s <= 4; ++s) f[s - 1] = ply_functions(problem.angles(), s);

  for (Block x : problem.target().blocks()) {
    const auto& alpha = problem.weights().of(x);
    for (int l = 1; l <= 4; ++l) {
      const double xi = problem.target().at(x, l);
      // (sum_n h_n)^2 = sum_n h_n^2 + 2 sum_{n<m} h_n h_m
      std::vector<std::array<double, 4>> c(static_cast<std::size_t>(n));
      const double share = xi / n;
      for (int p = 0; p < n; ++p) {
        std::array<double, 4> h{}, h2{};
        for (int s = 0; s < 4; ++s) {
          h[s] = alpha[p] * f[s][l - 1] - share;
          h2[s] = h[s] * h[s];
        }
        c[p] = walsh1(h);
        const auto sq = walsh1(h2);
        for (int m = 0; m < 4; ++m) acc.add(subset_qubits(p, m), sq[m]);
      }
      for (int p = 0; p < n; ++p)
        for (int q = p + 1; q < n; ++q)
          for (int mp = 0; mp < 4; ++mp) {
            if (c[p][mp] == 0.0) continue;
            for (int mq = 0; mq < 4; ++mq) {
              if (c[q][mq] == 0.0) continue;
              auto sup = subset_qubits(p, mp);
              auto sq = subset_qubits(q, mq);
              sup.insert(sup.end(), sq.begin(), sq.end());
              acc.add(sup, 2.0 * c[p][mp] * c[q][mq]);
            }
          }
    }
  }

  if (include_disorientation) {
    for (const auto& spec : problem.constraints()) {
      const auto* dis = std::get_if<Disorientation>(&spec);
      if (!dis) continue;
      std::array<std::array<double, 4>, 4> g{};
      for (auto [a, b] : disorientation_violation_pairs(problem.angles(), dis->max_delta_deg)) g[a - 1][b - 1] = dis->gamma;
      // Walsh transform over the four qubits of plies p and p+1.
      std::array<double, 16> w{};
      for (int m = 0; m < 16; ++m)
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b) {
            const int bits[4] = {kCodes[a][0], kCodes[a][1], kCodes[b][0], kCodes[b][1]};
            int parity = 0;
            for (int i = 0; i < 4; ++i)
              if (m & (1 << i)) parity ^= bits[i];
            w[m] += g[a][b] * (parity ? -1.0 : 1.0) / 16.0;
          }
      for (int p = 0; p + 1 < n; ++p)
        for (int m = 0; m < 16; ++m) {
          std::vector<int> sup;
          for (int i = 0; i < 4; ++i)
            if (m & (1 << i)) sup.push_back(2 * p + i);
          acc.add(sup, w[m]);
        }
    }
  }
  return acc.finish(2 * n);
}

TermCensus term_census(const PauliExpansion& expansion) {
  TermCensus c;
  c.by_weight.assign(5, 0);
  if (expansion.offset != 0.0) c.by_weight[0] = 1;
  for (const auto& t : expansion.terms) {
    const std::size_t w = t.support.size();
    if (w >= c.by_weight.size()) c.by_weight.resize(w + 1, 0);
    c.by_weight[w]++;
    c.cnot_count += 2 * w;
    c.rotation_count++;
  }
  return c;
}

}  // namespace ssr
