#pragma once

// Unit-test synthesis from seed paths: one Arrange/Act/Assert plan per
// dependency activation observed at a call-site statement.

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "carve/ast.hpp"
#include "carve/callsites.hpp"
#include "carve/object_flow.hpp"
#include "carve/seed_paths.hpp"

namespace carve {

inline constexpr const char* kActualResult = "actualResult";
inline constexpr int kAssertDepth = 3;

struct PlanAssert {
  AstNode target;  // path expression rooted at actualResult or an act operand
  Value expected;
};

struct Provenance {
  Iid test_iid = 0;
  AstLocation test_loc;
  std::size_t path = 0;
  std::size_t statement = 0;
  Iid site_iid = 0;
  ContextId context = 0;
};

struct TestPlan {
  std::string name;        // <method>-T<seq>
  std::string dependency;  // qualified declaration name
  std::string method;
  std::vector<std::string> imports;
  std::vector<AstNode> arrange;
  AstNode act;
  std::vector<PlanAssert> asserts;
  Provenance provenance;
};

struct PlanFailure {
  Provenance provenance;
  std::string message;
};

using PlanOutcome = std::variant<TestPlan, PlanFailure>;

struct GenerationResult {
  std::vector<TestPlan> plans;  // de-duplicated and named
  std::vector<PlanFailure> failures;
  std::size_t candidates = 0;
  std::size_t duplicates = 0;
};

// Literal node for a primitive value; iid 0.
AstNode literal_node(const Value& v);

// Nearest statement at or before `from` whose write bound `ref` to a name.
// Returns (name, statement index); throws Resolution when there is none.
std::pair<std::string, std::size_t> resolve_id_for_ref(RefId ref, const SeedPath& path, std::size_t from);

// Builds one plan for DEP context `ctx` spawned by statement k of path p.
// The plan is unnamed; generate_all assigns names after de-duplication.
PlanOutcome generate_plan(const Analysis& analysis, const AstForest& forest, const CallSiteSet& sites,
                          const FlowSlice& slice, ContextId ctx);

GenerationResult generate_all(const Analysis& analysis, const std::vector<FlowSlice>& slices,
                              const CallSiteSet& sites, const AstForest& forest);
GenerationResult generate_all_serial(const Analysis& analysis, const std::vector<FlowSlice>& slices,
                                     const CallSiteSet& sites, const AstForest& forest);

// Canonical rendering in the surface syntax.
std::string render_plan_body(const TestPlan& plan);
std::string render_plan(const TestPlan& plan);
// A whole test file: union of imports, then the plans in order.
std::string render_plan_file(const std::vector<const TestPlan*>& plans);

Json plan_to_json(const TestPlan& plan);
TestPlan plan_from_json(const Json& v);
Json failure_to_json(const PlanFailure& f);

}  // namespace carve
