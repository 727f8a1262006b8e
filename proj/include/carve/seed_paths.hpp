#pragma once

// Seed execution paths: the statements of each filtered test run, restricted
// to test-case and target-component code, with the values, references and
// spawned contexts observed while they executed.

#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "carve/ast.hpp"
#include "carve/callsites.hpp"
#include "carve/context.hpp"
#include "carve/trace.hpp"

namespace carve {

inline constexpr std::size_t kRootPath = std::numeric_limits<std::size_t>::max();

struct StatementNode {
  Iid iid = 0;
  ContextId ctx = 0;
  // V_n: primitive writes, one entry per name, last value wins.
  PropList defined;
  // Reference writes: name -> ref, one entry per name.
  std::vector<std::pair<std::string, RefId>> bound;
  std::vector<RefId> used;     // R_u, sorted unique
  std::vector<RefId> mutated;  // R_d, sorted unique
  std::vector<ContextId> spawned;  // CTX, activation order
  // Index of the last statement that started before this one ended; the
  // statement encloses every index in (own index, last].
  std::size_t last = 0;

  const Value* defined_value(const std::string& name) const;
  std::optional<RefId> bound_ref(const std::string& name) const;
};

struct SeedPath {
  Iid test_iid = 0;
  AstLocation test_loc;
  std::vector<StatementNode> statements;
};

struct Analysis {
  std::vector<ExecutionContext> contexts;  // index == ContextId; 0 is ROOT
  RefRegistry refs;
  std::vector<SeedPath> paths;
  std::vector<StatementNode> root_statements;
  std::vector<std::string> warnings;

  const ExecutionContext& context(ContextId id) const { return contexts.at(id); }
  bool has_dep(const StatementNode& n) const;
};

// Algorithm 4 plus the instruction hooks, as a streaming reducer.
class PathBuilder {
 public:
  // `only_tests`, when set, keeps paths of those tests only; other tests are
  // replayed for stack consistency and dropped silently.
  PathBuilder(const AstForest& forest, const CallSiteSet& sites,
              std::optional<std::set<Iid>> only_tests = std::nullopt);

  void on_event(const TraceEvent& e);
  Analysis finish();

 private:
  struct Slot {
    std::size_t path;   // kRootPath for root statements
    std::size_t index;
    ContextId ctx;
    std::size_t occurrence;
  };

  ExecutionContext& top_ctx() { return analysis_.contexts.at(ctx_stack_.back()); }
  bool skipped() const;
  StatementNode& node(const Slot& s);
  void observe(const Value& v);
  void observe_refs(const std::vector<Value>& vs);
  bool under_dep() const;
  void note_mutation(RefId base);
  void add_used(const Value& v);
  void add_mutated(RefId ref);

  void start_statement(const TraceEvent& e);
  void end_statement(const TraceEvent& e);
  void function_enter(const TraceEvent& e);
  void function_exit(const TraceEvent& e);
  void instruction(const TraceEvent& e);
  void flush_path();

  const AstForest& forest_;
  const CallSiteSet& sites_;
  ContextClassifier classifier_;
  std::optional<std::set<Iid>> only_tests_;
  Analysis analysis_;
  std::vector<ContextId> ctx_stack_;
  std::vector<Slot> stmt_stack_;
  std::optional<SeedPath> current_;
  std::optional<Iid> inv_id_;
  std::map<RefId, std::size_t> born_;  // first-observation statement occurrence
  std::size_t occurrences_ = 0;
  bool finished_ = false;
};

Analysis build_seed_paths(const std::vector<TraceEvent>& events, const AstForest& forest,
                          const CallSiteSet& sites, std::optional<std::set<Iid>> only_tests = std::nullopt);

Json analysis_to_json(const Analysis& a);
Analysis analysis_from_json(const Json& v);

}  // namespace carve
