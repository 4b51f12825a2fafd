#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "ssr/dmrg.hpp"
#include "ssr/laminate.hpp"
#include "ssr/mps.hpp"
#include "ssr/oracle.hpp"
#include "ssr/pauli.hpp"
#include "ssr/targets.hpp"

namespace ssr {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

// Compact dump with sorted keys; identical inputs give identical bytes.
std::string canonical_dump(const json& j);

json to_json(const LaminationPoint& p);
LaminationPoint lamination_from_json(const json& j);

json to_json(const ConstraintSpec& c);
ConstraintSpec constraint_from_json(const json& j);

json to_json(const StackingSequence& s);
StackingSequence sequence_from_json(const json& j, int d);

// Problem documents: {"plies", "angles", "symmetric", "constraints",
// "target" | "target_sequence"}. Without a target the zero point is used.
json problem_to_json(const SsrProblem& p);
SsrProblem problem_from_json(const json& j);

json to_json(const Mps& mps);
Mps mps_from_json(const json& j);

json to_json(const TargetSet& t);
TargetSet target_set_from_json(const json& j);

json to_json(const PauliExpansion& e);
json to_json(const TermCensus& c);
json to_json(const OracleResult& r);

json to_json(const DmrgPlan& plan);
DmrgPlan plan_from_json(const json& j);

json to_json(const SweepRecord& r, bool include_timing);
// One line per sweep record. Durations are left out when include_timing is
// false so that repeated runs compare byte-for-byte.
std::string trace_to_jsonl(const SweepTrace& trace, bool include_timing);

}  // namespace ssr
