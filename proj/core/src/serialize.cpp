#include "ssr/serialize.hpp"

#include "ssr/errors.hpp"

namespace ssr {

namespace {

std::array<double, 4> four(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 4) throw DomainError(std::string(what) + " must be an array of four numbers");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

}  // namespace

std::string canonical_dump(const json& j) { return j.dump(); }

json to_json(const LaminationPoint& p) {
  json j;
  j["symmetric"] = p.symmetric;
  for (Block x : p.blocks()) j[block_name(x)] = p.values[static_cast<int>(x)];
  return j;
}

LaminationPoint lamination_from_json(const json& j) {
  LaminationPoint p;
  p.symmetric = j.value("symmetric", !j.contains("B"));
  for (Block x : p.blocks()) {
    if (!j.contains(block_name(x))) throw DomainError(std::string("missing lamination block ") + block_name(x));
    p.values[static_cast<int>(x)] = four(j.at(block_name(x)), block_name(x));
  }
  return p;
}

json to_json(const ConstraintSpec& c) {
  json j;
  j["kind"] = constraint_name(c);
  j["gamma"] = constraint_gamma(c);
  if (const auto* x = std::get_if<Disorientation>(&c)) j["max_delta_deg"] = x->max_delta_deg;
  if (const auto* x = std::get_if<Contiguity>(&c)) j["max_same"] = x->max_same;
  if (const auto* x = std::get_if<Balanced>(&c)) {
    j["s"] = x->s;
    j["t"] = x->t;
  }
  if (const auto* x = std::get_if<MinCount>(&c)) {
    j["t"] = x->t;
    j["n_t"] = x->n_t;
  }
  return j;
}

ConstraintSpec constraint_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const double gamma = j.value("gamma", 0.25);
  if (kind == "disorientation") return Disorientation{j.value("max_delta_deg", 45.0), gamma};
  if (kind == "contiguity") return Contiguity{j.at("max_same").get<int>(), gamma};
  if (kind == "balanced") return Balanced{j.at("s").get<int>(), j.at("t").get<int>(), gamma};
  if (kind == "min_count") return MinCount{j.at("t").get<int>(), j.at("n_t").get<int>(), gamma};
  throw DomainError("unknown constraint kind: " + kind);
}

json to_json(const StackingSequence& s) { return s.labels(); }

StackingSequence sequence_from_json(const json& j, int d) {
  return StackingSequence(j.get<std::vector<int>>(), d);
}

json problem_to_json(const SsrProblem& p) {
  json j;
  j["plies"] = p.plies();
  j["angles"] = p.angles().all_degrees();
  j["symmetric"] = p.symmetric();
  j["target"] = to_json(p.target());
  j["constraints"] = json::array();
  for (const auto& c : p.constraints()) j["constraints"].push_back(to_json(c));
  return j;
}

SsrProblem problem_from_json(const json& j) {
  AngleSet angles = j.contains("angles") ? AngleSet(j.at("angles").get<std::vector<double>>()) : AngleSet::standard_four();
  const int plies = j.at("plies").get<int>();
  const bool symmetric = j.value("symmetric", true);
  std::vector<ConstraintSpec> constraints;
  if (j.contains("constraints"))
    for (const auto& c : j.at("constraints")) constraints.push_back(constraint_from_json(c));
  LaminationPoint zero;
  zero.symmetric = symmetric;
  SsrProblem base(angles, plies, symmetric, zero, constraints);
  if (j.contains("target")) {
    LaminationPoint t = lamination_from_json(j.at("target"));
    t.symmetric = symmetric;
    return base.with_target(t);
  }
  if (j.contains("target_sequence"))
    return base.with_target(lamination_parameters(base, sequence_from_json(j.at("target_sequence"), angles.size())));
  return base;
}

json to_json(const Mps& mps) {
  json j;
  j["schema"] = kSchemaVersion;
  j["center"] = mps.center() ? json(*mps.center()) : json(nullptr);
  j["sites"] = json::array();
  for (int n = 0; n < mps.sites(); ++n) {
    const auto& t = mps.site(n);
    j["sites"].push_back({{"shape", t.shape()}, {"data", t.data()}});
  }
  return j;
}

Mps mps_from_json(const json& j) {
  if (j.value("schema", 0) != kSchemaVersion) throw DomainError("unsupported MPS schema");
  std::vector<DenseTensor> sites;
  for (const auto& s : j.at("sites"))
    sites.emplace_back(s.at("shape").get<std::vector<std::size_t>>(), s.at("data").get<std::vector<double>>());
  std::optional<int> c;
  if (!j.at("center").is_null()) c = j.at("center").get<int>();
  return Mps(std::move(sites), c);
}

json to_json(const TargetSet& t) {
  json j;
  j["schema"] = kSchemaVersion;
  j["provenance"] = {{"method", t.provenance.method},
                     {"seed", t.provenance.seed},
                     {"sample_count", t.provenance.sample_count},
                     {"bandwidth", t.provenance.bandwidth}};
  j["targets"] = json::array();
  for (const auto& e : t.entries) {
    json te;
    te["target"] = to_json(e.target);
    te["witness"] = e.witness ? to_json(*e.witness) : json(nullptr);
    if (e.witness) te["states"] = e.witness->states();
    j["targets"].push_back(te);
  }
  return j;
}

TargetSet target_set_from_json(const json& j) {
  TargetSet t;
  if (j.contains("provenance")) {
    const auto& p = j.at("provenance");
    t.provenance.method = p.value("method", "explicit");
    t.provenance.seed = p.value("seed", std::uint64_t{0});
    t.provenance.sample_count = p.value("sample_count", std::size_t{0});
    t.provenance.bandwidth = p.value("bandwidth", std::vector<double>{});
  } else {
    t.provenance.method = "explicit";
  }
  for (const auto& te : j.at("targets")) {
    TargetEntry e;
    e.target = lamination_from_json(te.at("target"));
    if (te.contains("witness") && !te.at("witness").is_null())
      e.witness = StackingSequence(te.at("witness").get<std::vector<int>>(), te.value("states", 4));
    t.entries.push_back(std::move(e));
  }
  return t;
}

json to_json(const PauliExpansion& e) {
  json j;
  j["schema"] = kSchemaVersion;
  j["num_qubits"] = e.num_qubits;
  j["offset"] = e.offset;
  j["terms"] = json::array();
  for (const auto& t : e.terms) j["terms"].push_back({{"support", t.support}, {"coefficient", t.coefficient}});
  return j;
}

json to_json(const TermCensus& c) {
  return {{"by_weight", c.by_weight}, {"cnot_count", c.cnot_count}, {"rotation_count", c.rotation_count}};
}

json to_json(const OracleResult& r) {
  json j;
  j["schema"] = kSchemaVersion;
  j["min_loss"] = r.min_loss;
  j["evaluated"] = r.evaluated;
  j["argmin"] = json::array();
  for (const auto& s : r.argmin) j["argmin"].push_back(to_json(s));
  j["histogram"] = {{"lo", r.histogram.lo}, {"hi", r.histogram.hi}, {"counts", r.histogram.counts}};
  return j;
}

json to_json(const DmrgPlan& p) {
  return {{"n_sweeps", p.n_sweeps},       {"direction", direction_name(p.direction)},
          {"chi_max", p.chi_max},         {"collapse", p.collapse},
          {"eig_tol", p.eig_tol},         {"eig_max_iter", p.eig_max_iter},
          {"svd_cutoff", p.svd_cutoff},   {"seed", p.seed},
          {"record_local_updates", p.record_local_updates}};
}

DmrgPlan plan_from_json(const json& j) {
  DmrgPlan p;
  p.n_sweeps = j.value("n_sweeps", p.n_sweeps);
  if (j.contains("direction")) p.direction = parse_direction(j.at("direction").get<std::string>());
  p.chi_max = j.value("chi_max", p.chi_max);
  p.collapse = j.value("collapse", p.collapse);
  p.eig_tol = j.value("eig_tol", p.eig_tol);
  p.eig_max_iter = j.value("eig_max_iter", p.eig_max_iter);
  p.svd_cutoff = j.value("svd_cutoff", p.svd_cutoff);
  p.seed = j.value("seed", p.seed);
  p.record_local_updates = j.value("record_local_updates", p.record_local_updates);
  return p;
}

json to_json(const SweepRecord& r, bool include_timing) {
  json j;
  j["sweep"] = r.sweep;
  j["expectation"] = r.expectation;
  j["chi"] = r.max_bond;
  j["chi_cap"] = r.chi_cap;
  j["lambda_min"] = r.lambda_min ? json(*r.lambda_min) : json(nullptr);
  j["norm"] = r.norm;
  if (include_timing) j["duration_ms"] = r.duration_ms;
  if (!r.local.empty()) {
    j["local"] = json::array();
    for (const auto& u : r.local)
      j["local"].push_back({{"bond", u.bond},
                            {"lambda", u.lambda},
                            {"rayleigh_before", u.rayleigh_before},
                            {"discarded_weight", u.discarded_weight},
                            {"kept_rank", u.kept_rank},
                            {"iterations", u.iterations},
                            {"converged", u.eig_converged}});
  }
  return j;
}

std::string trace_to_jsonl(const SweepTrace& trace, bool include_timing) {
  std::string out;
  for (const auto& r : trace.records) {
    out += canonical_dump(to_json(r, include_timing));
    out += '\n';
  }
  return out;
}

}  // namespace ssr
