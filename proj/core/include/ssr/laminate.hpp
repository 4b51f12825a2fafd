#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

namespace ssr {

enum class Block { A = 0, B = 1, D = 2 };

const char* block_name(Block x);

// Ply angles in degrees, each in (-90, 90]. Label s refers to angles()[s - 1].
class AngleSet {
public:
  explicit AngleSet(std::vector<double> degrees);

  static AngleSet standard_four();             // {0, 45, 90, -45}
  static AngleSet evenly_spaced(int d, double first_deg = 0.0);

  int size() const { return static_cast<int>(degrees_.size()); }
  double degrees(int label) const;
  double radians(int label) const;
  const std::vector<double>& all_degrees() const { return degrees_; }

  // True when label s + 1 sits 180/d degrees after label s (mod 180).
  bool evenly_spaced() const { return evenly_spaced_; }
  double spacing_deg() const { return 180.0 / size(); }

  // Circular difference modulo 180 degrees between two labels.
  double angle_difference(int a, int b) const;

private:
  std::vector<double> degrees_;
  std::vector<double> radians_;
  bool evenly_spaced_ = false;
};

class StackingSequence {
public:
  StackingSequence() = default;
  StackingSequence(std::vector<int> labels, int d);

  int size() const { return static_cast<int>(labels_.size()); }
  int operator[](int n) const { return labels_[static_cast<std::size_t>(n)]; }
  const std::vector<int>& labels() const { return labels_; }
  int states() const { return d_; }
  int count(int label) const;

  std::string to_string() const;
  friend bool operator==(const StackingSequence& a, const StackingSequence& b) {
    return a.labels_ == b.labels_ && a.d_ == b.d_;
  }
  friend bool operator<(const StackingSequence& a, const StackingSequence& b) {
    return a.labels_ < b.labels_;
  }

private:
  std::vector<int> labels_;
  int d_ = 0;
};

// Lamination parameters v_l^X. Symmetric points carry only the A and D blocks.
struct LaminationPoint {
  bool symmetric = true;
  std::array<std::array<double, 4>, 3> values{};

  double& at(Block x, int l);
  double at(Block x, int l) const;

  std::vector<Block> blocks() const;
  int component_count() const { return symmetric ? 8 : 12; }
  std::vector<double> flatten() const;
  static LaminationPoint from_flat(const std::vector<double>& flat, bool symmetric);
};

struct PlyWeights {
  bool symmetric = true;
  // alpha[X][n], n = 0..N-1; the B row is empty in symmetric mode.
  std::array<std::vector<double>, 3> alpha;

  static PlyWeights symmetric_weights(int n_plies);
  static PlyWeights general_weights(int n_plies);

  int plies() const { return static_cast<int>(alpha[0].size()); }
  const std::vector<double>& of(Block x) const { return alpha[static_cast<int>(x)]; }
};

struct Disorientation {
  double max_delta_deg = 45.0;
  double gamma = 0.25;
};
struct Contiguity {
  int max_same = 4;
  double gamma = 0.25;
};
struct Balanced {
  int s = 2;
  int t = 4;
  double gamma = 0.25;
};
struct MinCount {
  int t = 1;
  int n_t = 1;
  double gamma = 0.25;
};

using ConstraintSpec = std::variant<Disorientation, Contiguity, Balanced, MinCount>;

std::string constraint_name(const ConstraintSpec& c);
double constraint_gamma(const ConstraintSpec& c);

class SsrProblem {
public:
  SsrProblem(AngleSet angles, int n_plies, bool symmetric, LaminationPoint target,
             std::vector<ConstraintSpec> constraints = {});

  const AngleSet& angles() const { return angles_; }
  int states() const { return angles_.size(); }
  int plies() const { return n_plies_; }
  bool symmetric() const { return symmetric_; }
  const PlyWeights& weights() const { return weights_; }
  const LaminationPoint& target() const { return target_; }
  const std::vector<ConstraintSpec>& constraints() const { return constraints_; }

  SsrProblem with_target(LaminationPoint target) const;
  SsrProblem with_constraints(std::vector<ConstraintSpec> constraints) const;
  void check_sequence(const StackingSequence& seq) const;

private:
  AngleSet angles_;
  int n_plies_;
  bool symmetric_;
  PlyWeights weights_;
  LaminationPoint target_;
  std::vector<ConstraintSpec> constraints_;
};

std::array<double, 4> ply_functions(const AngleSet& angles, int s);

LaminationPoint lamination_parameters(const SsrProblem& problem, const StackingSequence& seq);

// Squared distance to the target, without penalties.
double loss(const SsrProblem& problem, const StackingSequence& seq);
double loss_to(const SsrProblem& problem, const StackingSequence& seq, const LaminationPoint& target);

// Integer violation count (or squared imbalance / shortfall) before gamma.
double violation_measure(const AngleSet& angles, const ConstraintSpec& spec,
                         const StackingSequence& seq);
double penalty_value(const AngleSet& angles, const ConstraintSpec& spec,
                     const StackingSequence& seq);
double total_penalty(const SsrProblem& problem, const StackingSequence& seq);

// Ordered label pairs (a, b) that break a disorientation limit.
std::vector<std::pair<int, int>> disorientation_violation_pairs(const AngleSet& angles,
                                                                double max_delta_deg);
int disorientation_violations(const AngleSet& angles, double max_delta_deg,
                              const StackingSequence& seq);

// sqrt(H / K) with K the component count.
double rmse(const SsrProblem& problem, const StackingSequence& seq);
double rmse_from_loss(double h, bool symmetric);
// sqrt(H).
double euclidean_distance(const SsrProblem& problem, const StackingSequence& seq);

// Element of the dihedral group acting on evenly spaced angle sets: optional
// reflection about the first angle, followed by a shift of `rotation` labels.
struct DihedralElement {
  int rotation = 0;
  bool reflect = false;
};

std::vector<DihedralElement> dihedral_group(const AngleSet& angles);
int apply(const AngleSet& angles, const DihedralElement& g, int label);
StackingSequence apply(const AngleSet& angles, const DihedralElement& g,
                       const StackingSequence& seq);
// Matching orthogonal map on lamination parameters.
LaminationPoint apply(const AngleSet& angles, const DihedralElement& g, const LaminationPoint& p);

std::vector<StackingSequence> symmetry_orbit(const AngleSet& angles, const StackingSequence& seq);
StackingSequence canonical_representative(const AngleSet& angles, const StackingSequence& seq);

}  // namespace ssr
