#include "ssr/laminate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ssr/errors.hpp"

namespace ssr {

namespace {

constexpr double kAngleTol = 1e-9;

double wrap180(double deg) {
  double r = std::fmod(deg, 180.0);
  if (r < 0) r += 180.0;
  if (r > 180.0 - kAngleTol) r = 0.0;
  return r;
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

const char* block_name(Block x) {
  switch (x) {
    case Block::A: return "A";
    case Block::B: return "B";
    case Block::D: return "D";
  }
  return "?";
}

AngleSet::AngleSet(std::vector<double> degrees) : degrees_(std::move(degrees)) {
  const int d = size();
  if (d < 2) throw DomainError("angle set needs at least two angles");
  for (double a : degrees_) {
    if (!std::isfinite(a) || a <= -90.0 || a > 90.0)
      throw DomainError("ply angle outside (-90, 90]: " + std::to_string(a));
  }
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j)
      if (std::abs(wrap180(degrees_[i] - degrees_[j])) < kAngleTol)
        throw DomainError("ply angles must be pairwise distinct");
  radians_.reserve(degrees_.size());
  for (double a : degrees_) radians_.push_back(a * std::numbers::pi / 180.0);

  evenly_spaced_ = true;
  const double step = 180.0 / d;
  for (int s = 1; s < d && evenly_spaced_; ++s) {
    double expected = wrap180(degrees_[0] + s * step);
    double got = wrap180(degrees_[s]);
    double diff = std::abs(expected - got);
    if (std::min(diff, 180.0 - diff) > kAngleTol) evenly_spaced_ = false;
  }
}

AngleSet AngleSet::standard_four() { return AngleSet({0.0, 45.0, 90.0, -45.0}); }

AngleSet AngleSet::evenly_spaced(int d, double first_deg) {
  if (d < 2) throw DomainError("angle set needs at least two angles");
  std::vector<double> out;
  for (int s = 0; s < d; ++s) {
    double a = wrap180(first_deg + s * 180.0 / d);
    if (a > 90.0 + kAngleTol) a -= 180.0;
    out.push_back(a);
  }
  return AngleSet(std::move(out));
}

double AngleSet::degrees(int label) const {
  if (label < 1 || label > size()) throw DomainError("ply label out of range");
  return degrees_[label - 1];
}

double AngleSet::radians(int label) const {
  if (label < 1 || label > size()) throw DomainError("ply label out of range");
  return radians_[label - 1];
}

double AngleSet::angle_difference(int a, int b) const {
  double diff = std::abs(degrees(a) - degrees(b));
  diff = std::fmod(diff, 180.0);
  return std::min(diff, 180.0 - diff);
}

StackingSequence::StackingSequence(std::vector<int> labels, int d) : labels_(std::move(labels)), d_(d) {
  if (d < 1) throw DomainError("state count must be positive");
  if (labels_.empty()) throw DomainError("stacking sequence must have at least one ply");
  for (int s : labels_)
    if (s < 1 || s > d) throw DomainError("ply label " + std::to_string(s) + " outside 1.." + std::to_string(d));
}

int StackingSequence::count(int label) const {
  return static_cast<int>(std::count(labels_.begin(), labels_.end(), label));
}

std::string StackingSequence::to_string() const {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < labels_.size(); ++i) os << (i ? "," : "") << labels_[i];
  os << ')';
  return os.str();
}

double& LaminationPoint::at(Block x, int l) {
  if (l < 1 || l > 4) throw DomainError("lamination parameter index must be 1..4");
  if (symmetric && x == Block::B) throw DomainError("symmetric laminates have no B block");
  return values[static_cast<int>(x)][l - 1];
}

double LaminationPoint::at(Block x, int l) const {
  return const_cast<LaminationPoint*>(this)->at(x, l);
}

std::vector<Block> LaminationPoint::blocks() const {
  if (symmetric) return {Block::A, Block::D};
  return {Block::A, Block::B, Block::D};
}

std::vector<double> LaminationPoint::flatten() const {
  std::vector<double> out;
  for (Block x : blocks())
    for (int l = 1; l <= 4; ++l) out.push_back(at(x, l));
  return out;
}

LaminationPoint LaminationPoint::from_flat(const std::vector<double>& flat, bool symmetric) {
  LaminationPoint p;
  p.symmetric = symmetric;
  if (static_cast<int>(flat.size()) != p.component_count())
    throw DomainError("expected " + std::to_string(p.component_count()) + " lamination parameters");
  std::size_t i = 0;
  for (Block x : p.blocks())
    for (int l = 1; l <= 4; ++l) p.at(x, l) = flat[i++];
  return p;
}

PlyWeights PlyWeights::symmetric_weights(int n_plies) {
  if (n_plies < 1) throw DomainError("ply count must be positive");
  PlyWeights w;
  w.symmetric = true;
  const double n = n_plies;
  for (int i = 1; i <= n_plies; ++i) {
    w.alpha[0].push_back(1.0 / n);
    double a = static_cast<double>(i), b = static_cast<double>(i - 1);
    w.alpha[2].push_back((a * a * a - b * b * b) / (n * n * n));
  }
  return w;
}

PlyWeights PlyWeights::general_weights(int n_plies) {
  if (n_plies < 1) throw DomainError("ply count must be positive");
  PlyWeights w;
  w.symmetric = false;
  const double n = n_plies;
  auto z = [n](int i) { return -n / 2.0 + i; };
  for (int i = 1; i <= n_plies; ++i) {
    double z0 = z(i - 1), z1 = z(i);
    w.alpha[0].push_back((z1 - z0) / n);
    w.alpha[1].push_back(2.0 / (n * n) * (z1 * z1 - z0 * z0));
    w.alpha[2].push_back(4.0 / (n * n * n) * (z1 * z1 * z1 - z0 * z0 * z0));
  }
  return w;
}

std::string constraint_name(const ConstraintSpec& c) {
  return std::visit(overloaded{[](const Disorientation&) { return std::string("disorientation"); },
                               [](const Contiguity&) { return std::string("contiguity"); },
                               [](const Balanced&) { return std::string("balanced"); },
                               [](const MinCount&) { return std::string("min_count"); }},
                    c);
}

double constraint_gamma(const ConstraintSpec& c) {
  return std::visit([](const auto& x) { return x.gamma; }, c);
}

SsrProblem::SsrProblem(AngleSet angles, int n_plies, bool symmetric, LaminationPoint target,
                       std::vector<ConstraintSpec> constraints)
    : angles_(std::move(angles)),
      n_plies_(n_plies),
      symmetric_(symmetric),
      weights_(symmetric ? PlyWeights::symmetric_weights(n_plies) : PlyWeights::general_weights(n_plies)),
      target_(std::move(target)),
      constraints_(std::move(constraints)) {
  if (target_.symmetric != symmetric_) throw DomainError("target mode does not match problem mode");
  for (double v : target_.flatten())
    if (!std::isfinite(v) || std::abs(v) > 1.0 + 1e-12)
      throw DomainError("target lamination parameters must lie in [-1, 1]");
  const int d = states();
  for (const auto& c : constraints_) {
    if (!(constraint_gamma(c) >= 0.0) || !std::isfinite(constraint_gamma(c)))
      throw DomainError("penalty magnitude must be a finite nonnegative number");
    std::visit(overloaded{[](const Disorientation& x) {
                            if (!(x.max_delta_deg >= 0.0)) throw DomainError("max_delta must be nonnegative");
                          },
                          [](const Contiguity& x) {
                            if (x.max_same < 1) throw DomainError("max_same must be at least 1");
                          },
                          [d](const Balanced& x) {
                            if (x.s < 1 || x.s > d || x.t < 1 || x.t > d || x.s == x.t)
                              throw DomainError("balanced labels must be distinct and within 1..d");
                          },
                          [d, n_plies](const MinCount& x) {
                            if (x.t < 1 || x.t > d) throw DomainError("min_count label outside 1..d");
                            if (x.n_t < 1 || x.n_t > n_plies) throw DomainError("min_count requires 1 <= N_t <= N");
                          }},
               c);
  }
}

SsrProblem SsrProblem::with_target(LaminationPoint target) const {
  return SsrProblem(angles_, n_plies_, symmetric_, std::move(target), constraints_);
}

SsrProblem SsrProblem::with_constraints(std::vector<ConstraintSpec> constraints) const {
  return SsrProblem(angles_, n_plies_, symmetric_, target_, std::move(constraints));
}

void SsrProblem::check_sequence(const StackingSequence& seq) const {
  if (seq.size() != n_plies_)
    throw DomainError("sequence has " + std::to_string(seq.size()) + " plies, problem has " +
                      std::to_string(n_plies_));
  for (int s : seq.labels())
    if (s < 1 || s > states()) throw DomainError("ply label outside 1..d");
}

std::array<double, 4> ply_functions(const AngleSet& angles, int s) {
  const double t = angles.radians(s);
  return {std::cos(2 * t), std::sin(2 * t), std::cos(4 * t), std::sin(4 * t)};
}

LaminationPoint lamination_parameters(const SsrProblem& problem, const StackingSequence& seq) {
  problem.check_sequence(seq);
  LaminationPoint p;
  p.symmetric = problem.symmetric();
  for (Block x : p.blocks()) {
    const auto& alpha = problem.weights().of(x);
    for (int n = 0; n < seq.size(); ++n) {
      auto f = ply_functions(problem.angles(), seq[n]);
      for (int l = 0; l < 4; ++l) p.values[static_cast<int>(x)][l] += alpha[n] * f[l];
    }
  }
  return p;
}

double loss_to(const SsrProblem& problem, const StackingSequence& seq, const LaminationPoint& target) {
  auto v = lamination_parameters(problem, seq).flatten();
  auto xi = target.flatten();
  if (v.size() != xi.size()) throw DomainError("target mode does not match problem mode");
  double h = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) h += (v[i] - xi[i]) * (v[i] - xi[i]);
  return h;
}

double loss(const SsrProblem& problem, const StackingSequence& seq) {
  return loss_to(problem, seq, problem.target());
}

std::vector<std::pair<int, int>> disorientation_violation_pairs(const AngleSet& angles,
                                                                double max_delta_deg) {
  std::vector<std::pair<int, int>> out;
  for (int a = 1; a <= angles.size(); ++a)
    for (int b = 1; b <= angles.size(); ++b)
      if (angles.angle_difference(a, b) > max_delta_deg + kAngleTol) out.emplace_back(a, b);
  return out;
}

int disorientation_violations(const AngleSet& angles, double max_delta_deg,
                              const StackingSequence& seq) {
  int count = 0;
  for (int n = 0; n + 1 < seq.size(); ++n)
    if (angles.angle_difference(seq[n], seq[n + 1]) > max_delta_deg + kAngleTol) ++count;
  return count;
}

double violation_measure(const AngleSet& angles, const ConstraintSpec& spec,
                         const StackingSequence& seq) {
  return std::visit(
      overloaded{[&](const Disorientation& x) {
                   return static_cast<double>(disorientation_violations(angles, x.max_delta_deg, seq));
                 },
                 [&](const Contiguity& x) {
                   const int k = x.max_same + 1;
                   int windows = 0;
                   for (int n = 0; n + k <= seq.size(); ++n) {
                     bool same = true;
                     for (int j = 1; j < k && same; ++j) same = seq[n + j] == seq[n];
                     windows += same;
                   }
                   return static_cast<double>(windows);
                 },
                 [&](const Balanced& x) {
                   const double diff = seq.count(x.s) - seq.count(x.t);
                   return diff * diff;
                 },
                 [&](const MinCount& x) { return static_cast<double>(std::max(0, x.n_t - seq.count(x.t))); }},
      spec);
}

double penalty_value(const AngleSet& angles, const ConstraintSpec& spec, const StackingSequence& seq) {
  return constraint_gamma(spec) * violation_measure(angles, spec, seq);
}

double total_penalty(const SsrProblem& problem, const StackingSequence& seq) {
  problem.check_sequence(seq);
  double p = 0.0;
  for (const auto& c : problem.constraints()) p += penalty_value(problem.angles(), c, seq);
  return p;
}

double rmse_from_loss(double h, bool symmetric) { return std::sqrt(h / (symmetric ? 8.0 : 12.0)); }

double rmse(const SsrProblem& problem, const StackingSequence& seq) {
  return rmse_from_loss(loss(problem, seq), problem.symmetric());
}

double euclidean_distance(const SsrProblem& problem, const StackingSequence& seq) {
  return std::sqrt(loss(problem, seq));
}

}  // namespace ssr
