#pragma once

// Test-case filtering: replays a full-suite trace and keeps the test cases
// whose execution reaches a dependency call site from inside the target.

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

// LIFO stack of execution contexts. Never empty: the bottom is ROOT.
class ContextStack {
 public:
  ContextStack();

  const ExecutionContext& top() const { return stack_.back(); }
  ContextType active_type() const { return top().type; }
  std::size_t depth() const { return stack_.size(); }
  void push(ExecutionContext ctx);
  // Throws Structure when only ROOT is left.
  ExecutionContext pop();
  // Innermost TEST context, scanning from the top.
  const ExecutionContext* find_test_context() const;

 private:
  std::vector<ExecutionContext> stack_;
};

ExecutionContext activate_execution_context(ContextStack& stack, const ContextClassifier& classifier,
                                            Iid decl_iid, std::optional<Iid> inv_id, Iid func_id);

struct FilterResult {
  std::vector<Iid> tests;  // T_C as test declaration iids, source order
  std::vector<AstLocation> test_locs;
  std::map<Iid, std::set<Iid>> reached_sites;
  std::vector<std::string> warnings;
};

class TestFilter {
 public:
  TestFilter(const AstForest& forest, const CallSiteSet& sites);

  void on_event(const TraceEvent& e);
  FilterResult finish();
  const ContextStack& stack() const { return stack_; }

 private:
  const AstForest& forest_;
  const CallSiteSet& sites_;
  ContextClassifier classifier_;
  ContextStack stack_;
  std::optional<Iid> inv_id_;
  std::set<Iid> tests_;
  FilterResult result_;
};

FilterResult filter_tests(const std::vector<TraceEvent>& events, const AstForest& forest,
                          const CallSiteSet& sites);

// nullopt when T_C is empty: there is nothing to analyze further.
std::optional<AstForest> merge_filtered_tests(const FilterResult& filtered, const AstForest& forest,
                               const std::string& test_dir);

inline constexpr const char* kMergedModuleName = "carve_merged_test.tj";

Json filter_result_to_json(const FilterResult& r);
FilterResult filter_result_from_json(const Json& v);

}  // namespace carve
