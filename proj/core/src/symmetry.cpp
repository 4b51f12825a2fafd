#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "ssr/errors.hpp"
#include "ssr/laminate.hpp"

namespace ssr {

namespace {

void require_even(const AngleSet& angles) {
  if (!angles.evenly_spaced())
    throw UnsupportedError("dihedral symmetry requires an evenly spaced angle set");
}

int mod(int a, int m) { return ((a % m) + m) % m; }

}  // namespace

std::vector<DihedralElement> dihedral_group(const AngleSet& angles) {
  require_even(angles);
  std::vector<DihedralElement> g;
  for (int reflect = 0; reflect < 2; ++reflect)
    for (int c = 0; c < angles.size(); ++c) g.push_back({c, reflect != 0});
  return g;
}

int apply(const AngleSet& angles, const DihedralElement& g, int label) {
  require_even(angles);
  const int d = angles.size();
  if (label < 1 || label > d) throw DomainError("ply label out of range");
  int k = label - 1;
  if (g.reflect) k = mod(-k, d);
  return mod(k + g.rotation, d) + 1;
}

StackingSequence apply(const AngleSet& angles, const DihedralElement& g, const StackingSequence& seq) {
  std::vector<int> out;
  out.reserve(seq.labels().size());
  for (int s : seq.labels()) out.push_back(apply(angles, g, s));
  return StackingSequence(std::move(out), seq.states());
}

LaminationPoint apply(const AngleSet& angles, const DihedralElement& g, const LaminationPoint& p) {
  require_even(angles);
  // theta -> sigma * theta + phi
  const double sigma = g.reflect ? -1.0 : 1.0;
  const double phi_deg = (g.reflect ? 2.0 * angles.degrees(1) : 0.0) + g.rotation * angles.spacing_deg();
  const double phi = phi_deg * std::numbers::pi / 180.0;
  LaminationPoint out = p;
  for (Block x : p.blocks()) {
    for (int h = 0; h < 2; ++h) {
      const double c = std::cos(2.0 * (h + 1) * phi), s = std::sin(2.0 * (h + 1) * phi);
      const double a = p.at(x, 2 * h + 1), b = sigma * p.at(x, 2 * h + 2);
      out.at(x, 2 * h + 1) = c * a - s * b;
      out.at(x, 2 * h + 2) = s * a + c * b;
    }
  }
  return out;
}

std::vector<StackingSequence> symmetry_orbit(const AngleSet& angles, const StackingSequence& seq) {
  std::set<StackingSequence> orbit;
  for (const auto& g : dihedral_group(angles)) orbit.insert(apply(angles, g, seq));
  return {orbit.begin(), orbit.end()};
}

StackingSequence canonical_representative(const AngleSet& angles, const StackingSequence& seq) {
  auto orbit = symmetry_orbit(angles, seq);
  return orbit.front();
}

}  // namespace ssr
