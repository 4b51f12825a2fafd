#include "ssr/dmrg.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>

#include "ssr/errors.hpp"

namespace ssr {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CMat = Eigen::Map<const RowMat>;
using Strided = Eigen::Map<const RowMat, 0, Eigen::OuterStride<>>;
using MStrided = Eigen::Map<RowMat, 0, Eigen::OuterStride<>>;

// Channel stacks of the two-site effective operator:
//   Y_{s1 s2} = sum_c LW_c[s1] X_{s1 s2} RW_c[s2]^T
struct EffectiveData {
  std::size_t cl = 0, cr = 0, d = 0, k = 0;
  std::vector<RowMat> lw;   // per s1: cl x (k cl), block c = LW_c[s1]
  std::vector<RowMat> rwt;  // per s2: cr x (k cr), block c = RW_c[s2]^T
  mutable std::vector<RowMat> z;
  mutable RowMat v;

  void apply(const double* x, double* y) const {
    const auto ecl = static_cast<Eigen::Index>(cl), ecr = static_cast<Eigen::Index>(cr);
    const auto ed = static_cast<Eigen::Index>(d);
    for (std::size_t s2 = 0; s2 < d; ++s2) {
      Strided xs(x + s2 * cr, ecl * ed, ecr, Eigen::OuterStride<>(ed * ecr));
      z[s2].noalias() = xs * rwt[s2];
    }
    for (std::size_t s1 = 0; s1 < d; ++s1) {
      for (std::size_t c = 0; c < k; ++c)
        for (std::size_t a = 0; a < cl; ++a)
          for (std::size_t s2 = 0; s2 < d; ++s2)
            v.block(static_cast<Eigen::Index>(c * cl + a), static_cast<Eigen::Index>(s2 * cr), 1, ecr) =
                z[s2].block(static_cast<Eigen::Index>(a * d + s1), static_cast<Eigen::Index>(c * cr), 1, ecr);
      MStrided ys(y + s1 * d * cr, ecl, ed * ecr, Eigen::OuterStride<>(ed * ed * ecr));
      ys.noalias() = lw[s1] * v;
    }
  }
};

struct Channel {
  std::vector<RowMat> lw;  // per s1, cl x cl
  std::vector<RowMat> rw;  // per s2, cr x cr
};

RowMat combine(const DenseTensor& env, const DenseTensor& w, bool over_left_index, std::size_t fixed_channel,
               std::size_t s) {
  // over_left_index: sum_w0 W[w0, fixed, s] env_w0; otherwise sum_w2 W[fixed, w2, s] env_w2
  const std::size_t chi = env.extent(1), b0 = w.extent(0), b1 = w.extent(1), d = w.extent(2);
  RowMat out = RowMat::Zero(static_cast<Eigen::Index>(chi), static_cast<Eigen::Index>(chi));
  const std::size_t n = over_left_index ? b0 : b1;
  for (std::size_t i = 0; i < n; ++i) {
    const double c = over_left_index ? w.data()[(i * b1 + fixed_channel) * d + s]
                                     : w.data()[(fixed_channel * b1 + i) * d + s];
    if (c == 0.0) continue;
    out += c * CMat(env.raw() + i * chi * chi, static_cast<Eigen::Index>(chi), static_cast<Eigen::Index>(chi));
  }
  return out;
}

bool all_zero(const std::vector<RowMat>& ms) {
  for (const auto& m : ms)
    if (m.size() && m.cwiseAbs().maxCoeff() != 0.0) return false;
  return true;
}

}  // namespace

const char* direction_name(SweepDirection d) {
  switch (d) {
    case SweepDirection::Outward: return "outward";
    case SweepDirection::Inward: return "inward";
    case SweepDirection::Alternating: return "alternating";
  }
  return "?";
}

SweepDirection parse_direction(const std::string& name) {
  if (name == "outward") return SweepDirection::Outward;
  if (name == "inward") return SweepDirection::Inward;
  if (name == "alternating") return SweepDirection::Alternating;
  throw DomainError("unknown sweep direction: " + name);
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

int DmrgPlan::collapse_length() const {
  int bits = 0;
  while ((1 << bits) < chi_max) ++bits;
  return bits + 1;
}

SweepSchedule DmrgPlan::schedule(int sweep) const {
  if (sweep < 0 || sweep >= n_sweeps) throw DomainError("sweep index out of range");
  if (collapse) {
    const int k = collapse_length();
    const int j = sweep - (n_sweeps - k) + 1;
    if (j >= 1 && j < k) return {std::max(1, chi_max >> j), svd_cutoff};
    if (j == k) return {1, 0.5};
  }
  return {chi_max, svd_cutoff};
}

void DmrgPlan::validate() const {
  if (n_sweeps < 1) throw DomainError("n_sweeps must be at least 1");
  if (chi_max < 1) throw DomainError("chi_max must be at least 1");
  if (collapse && n_sweeps <= collapse_length())
    throw DomainError("collapse needs more than " + std::to_string(collapse_length()) + " sweeps for chi_max " +
                      std::to_string(chi_max));
  if (!(eig_tol > 0.0)) throw DomainError("eig_tol must be positive");
  if (eig_max_iter < 1) throw DomainError("eig_max_iter must be at least 1");
  if (!(svd_cutoff >= 0.0 && svd_cutoff < 1.0)) throw DomainError("svd_cutoff must lie in [0, 1)");
}

DmrgEngine::DmrgEngine(const MpoSum& terms, Mps state) : terms_(&terms), state_(std::move(state)) {
  if (terms.terms.empty()) throw DomainError("no operator terms");
  if (terms.sites() != state_.sites() || terms.states() != state_.states())
    throw ShapeError("MPO and MPS dimensions differ");
  if (state_.sites() < 2) throw DomainError("two-site updates need at least two sites");
}

void DmrgEngine::reset(int site) {
  state_.move_center_to(site);
  env_.rebuild(state_, *terms_, site);
  // Also cover the block to the left of the center.
  if (site + 1 < state_.sites()) env_.update_right(state_, *terms_, site + 1);
}

std::vector<double> DmrgEngine::two_site_block(int bond) const {
  const auto& a = state_.site(bond);
  const auto& b = state_.site(bond + 1);
  const auto rows = static_cast<Eigen::Index>(a.extent(0) * a.extent(1));
  const auto mid = static_cast<Eigen::Index>(a.extent(2));
  const auto cols = static_cast<Eigen::Index>(b.extent(1) * b.extent(2));
  std::vector<double> out(static_cast<std::size_t>(rows * cols));
  Eigen::Map<RowMat>(out.data(), rows, cols).noalias() = CMat(a.raw(), rows, mid) * CMat(b.raw(), mid, cols);
  return out;
}

DmrgEngine::Effective DmrgEngine::effective_operator(int bond) const {
  const int n_sites = state_.sites();
  if (bond < 0 || bond + 1 >= n_sites) throw DomainError("bond index out of range");
  auto data = std::make_shared<EffectiveData>();
  data->cl = state_.site(bond).extent(0);
  data->cr = state_.site(bond + 1).extent(2);
  data->d = static_cast<std::size_t>(state_.states());
  const std::size_t cl = data->cl, cr = data->cr, d = data->d;

  std::vector<Channel> channels;
  Channel merged_right, merged_left;  // identity on the left / identity on the right
  bool any_automaton = false;
  for (std::size_t t = 0; t < terms_->terms.size(); ++t) {
    const auto& term = terms_->terms[t];
    const DenseTensor& w1 = term.site(bond);
    const DenseTensor& w2 = term.site(bond + 1);
    const DenseTensor& l = env_.left[t][bond];
    const DenseTensor& r = env_.right[t][bond + 2];
    if (l.extent(1) != cl || r.extent(1) != cr) throw ShapeError("environment is out of date");
    const std::size_t b1 = w1.extent(1);
    const bool automaton = term.automaton_form() && b1 >= 2;
    for (std::size_t c = 0; c < b1; ++c) {
      Channel ch;
      const bool ident_left = automaton && c == 0;
      const bool ident_right = automaton && c + 1 == b1;
      if (!ident_left)
        for (std::size_t s = 0; s < d; ++s) ch.lw.push_back(combine(l, w1, true, c, s));
      if (!ident_right)
        for (std::size_t s = 0; s < d; ++s) ch.rw.push_back(combine(r, w2, false, c, s));
      if (ident_left) {
        if (merged_right.rw.empty()) merged_right.rw = ch.rw;
        else
          for (std::size_t s = 0; s < d; ++s) merged_right.rw[s] += ch.rw[s];
        any_automaton = true;
      } else if (ident_right) {
        if (merged_left.lw.empty()) merged_left.lw = ch.lw;
        else
          for (std::size_t s = 0; s < d; ++s) merged_left.lw[s] += ch.lw[s];
        any_automaton = true;
      } else if (!all_zero(ch.lw) && !all_zero(ch.rw)) {
        channels.push_back(std::move(ch));
      }
    }
  }
  if (any_automaton) {
    const DenseTensor& el = env_.identity_left[bond];
    const DenseTensor& er = env_.identity_right[bond + 2];
    CMat elm(el.raw(), static_cast<Eigen::Index>(cl), static_cast<Eigen::Index>(cl));
    CMat erm(er.raw(), static_cast<Eigen::Index>(cr), static_cast<Eigen::Index>(cr));
    if (!merged_right.rw.empty()) {
      merged_right.lw.assign(d, RowMat(elm));
      channels.push_back(std::move(merged_right));
    }
    if (!merged_left.lw.empty()) {
      merged_left.rw.assign(d, RowMat(erm));
      channels.push_back(std::move(merged_left));
    }
  }

  const std::size_t k = std::max<std::size_t>(channels.size(), 1);
  data->k = k;
  const auto ecl = static_cast<Eigen::Index>(cl), ecr = static_cast<Eigen::Index>(cr);
  data->lw.assign(d, RowMat::Zero(ecl, static_cast<Eigen::Index>(k * cl)));
  data->rwt.assign(d, RowMat::Zero(ecr, static_cast<Eigen::Index>(k * cr)));
  for (std::size_t c = 0; c < channels.size(); ++c)
    for (std::size_t s = 0; s < d; ++s) {
      data->lw[s].block(0, static_cast<Eigen::Index>(c * cl), ecl, ecl) = channels[c].lw[s];
      data->rwt[s].block(0, static_cast<Eigen::Index>(c * cr), ecr, ecr) = channels[c].rw[s].transpose();
    }
  data->z.assign(d, RowMat(ecl * static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(k * cr)));
  data->v = RowMat(static_cast<Eigen::Index>(k * cl), static_cast<Eigen::Index>(d * cr));

  Effective eff;
  eff.dim = cl * d * d * cr;
  eff.apply = [data](const double* x, double* y) { data->apply(x, y); };
  return eff;
}

LocalUpdateStat DmrgEngine::local_update(int bond, Move move, const TruncationPolicy& policy,
                                         const EigenOptions& eig) {
  const auto c = state_.center();
  if (!c || (*c != bond && *c != bond + 1)) throw DomainError("center must sit on the updated block");
  const std::size_t cl = state_.site(bond).extent(0), cr = state_.site(bond + 1).extent(2);
  const std::size_t d = static_cast<std::size_t>(state_.states());

  std::vector<double> block = two_site_block(bond);
  Effective eff = effective_operator(bond);

  EigenResult res;
  try {
    res = smallest_eigenpair(eff.apply, eff.dim, eig, block);
  } catch (const EigenSolverError& e) {
    res = e.best();
    res.converged = false;
  }
  if (!std::isfinite(res.value)) throw NumericError("local eigenvalue is not finite");

  MatrixSvd svd = svd_truncate_matrix(res.vector.data(), cl * d, d * cr, policy);
  const std::size_t r = svd.rank;
  if (move == Move::Right) {
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < d * cr; ++j) svd.v[i * d * cr + j] *= svd.s[i];
    state_.set_site(bond, DenseTensor({cl, d, r}, std::move(svd.u)));
    state_.set_site(bond + 1, DenseTensor({r, d, cr}, std::move(svd.v)));
    state_.set_center(bond + 1);
    env_.update_left(state_, *terms_, bond);
  } else {
    for (std::size_t i = 0; i < cl * d; ++i)
      for (std::size_t j = 0; j < r; ++j) svd.u[i * r + j] *= svd.s[j];
    state_.set_site(bond, DenseTensor({cl, d, r}, std::move(svd.u)));
    state_.set_site(bond + 1, DenseTensor({r, d, cr}, std::move(svd.v)));
    state_.set_center(bond);
    env_.update_right(state_, *terms_, bond + 1);
  }

  LocalUpdateStat st;
  st.bond = bond;
  st.lambda = res.value;
  st.rayleigh_before = res.start_rayleigh;
  st.discarded_weight = svd.discarded_weight;
  st.kept_rank = static_cast<int>(r);
  st.iterations = res.iterations;
  st.eig_converged = res.converged;
  return st;
}

void DmrgEngine::gauge_shift_right(int site) {
  state_.shift_center_right(site);
  env_.update_left(state_, *terms_, site);
}

void DmrgEngine::gauge_shift_left(int site) {
  state_.shift_center_left(site);
  env_.update_right(state_, *terms_, site);
}

DmrgResult dmrg_run(const SsrProblem& problem, const MpoSum& terms, const Mps& init, const DmrgPlan& plan) {
  plan.validate();
  const int n_sites = problem.plies();
  if (init.sites() != n_sites || init.states() != problem.states())
    throw ShapeError("initial state does not match the problem dimensions");

  DmrgResult result;
  SweepTrace& trace = result.trace;
  DmrgEngine engine(terms, init);

  const bool start_left = plan.direction != SweepDirection::Inward;
  engine.reset(start_left ? 0 : n_sites - 1);
  engine.state().normalize();
  engine.reset(start_left ? 0 : n_sites - 1);

  auto record = [&](int sweep, int cap, double ms, std::optional<double> lmin, std::vector<LocalUpdateStat> local) {
    SweepRecord rec;
    rec.sweep = sweep;
    rec.expectation = expectation(engine.state(), terms);
    rec.max_bond = engine.state().max_bond_dim();
    rec.chi_cap = cap;
    rec.duration_ms = ms;
    rec.lambda_min = lmin;
    rec.norm = engine.state().norm();
    rec.local = std::move(local);
    if (!std::isfinite(rec.expectation)) throw NumericError("expectation value is not finite");
    trace.records.push_back(std::move(rec));
  };
  record(0, init.max_bond_dim(), 0.0, std::nullopt, {});

  for (int sweep = 0; sweep < plan.n_sweeps; ++sweep) {
    const SweepSchedule sched = plan.schedule(sweep);
    TruncationPolicy policy;
    policy.max_rank = static_cast<std::size_t>(sched.chi_cap);
    policy.cutoff = sched.cutoff;
    policy.renormalize = true;

    Move move;
    if (plan.direction == SweepDirection::Outward) move = Move::Right;
    else if (plan.direction == SweepDirection::Inward) move = Move::Left;
    else move = sweep % 2 == 0 ? Move::Right : Move::Left;

    std::vector<LocalUpdateStat> local;
    double lmin = std::numeric_limits<double>::infinity();
    const auto t0 = std::chrono::steady_clock::now();
    try {
      for (int step = 0; step + 1 < n_sites; ++step) {
        const int bond = move == Move::Right ? step : n_sites - 2 - step;
        EigenOptions eig;
        eig.tol = plan.eig_tol;
        eig.max_iter = plan.eig_max_iter;
        eig.seed = mix_seed(plan.seed, (static_cast<std::uint64_t>(sweep) << 32) | static_cast<std::uint64_t>(bond));
        LocalUpdateStat st = engine.local_update(bond, move, policy, eig);
        lmin = std::min(lmin, st.lambda);
        if (plan.record_local_updates) local.push_back(st);
      }
      // Unidirectional sweeps return to their start without optimizing.
      if (plan.direction == SweepDirection::Outward)
        for (int n = n_sites - 1; n > 0; --n) engine.gauge_shift_left(n);
      else if (plan.direction == SweepDirection::Inward)
        for (int n = 0; n + 1 < n_sites; ++n) engine.gauge_shift_right(n);
    } catch (const EigenSolverError& e) {
      throw DmrgAborted(std::string("eigensolver failure: ") + e.what(), trace);
    }
    const auto t1 = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    record(sweep + 1, sched.chi_cap, ms, lmin, std::move(local));
  }

  result.state = engine.state();
  if (result.state.max_bond_dim() == 1) result.sequence = extract_sequence(result.state);
  return result;
}

}  // namespace ssr
