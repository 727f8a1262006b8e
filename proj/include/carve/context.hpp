#pragma once

// Execution contexts: one per function activation observed in a trace.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "carve/ast.hpp"
#include "carve/callsites.hpp"
#include "carve/trace.hpp"

namespace carve {

enum class ContextType { Root, Test, Cmp, Dep, Other };

std::string_view to_string(ContextType type);
std::optional<ContextType> context_type_from_string(std::string_view text);

using ContextId = std::size_t;
using PropList = std::vector<std::pair<std::string, Value>>;

struct StatementRef {
  std::size_t path = 0;
  std::size_t index = 0;
  friend bool operator==(const StatementRef&, const StatementRef&) = default;
};

struct ExecutionContext {
  ContextId id = 0;
  Iid invocation_iid = 0;  // iid of the call instruction (1 for ROOT)
  Iid func_id = 0;         // declaration iid (0 for ROOT)
  ContextType type = ContextType::Root;
  std::optional<ContextId> parent;
  std::vector<StatementRef> statements;
  std::optional<Value> receiver;
  std::vector<Value> args;
  std::optional<Value> result;  // set on exit
  // DEP contexts only: objects whose properties were written inside this
  // activation, and the captured property state of everything reachable
  // from receiver, args and result when the activation ended.
  std::vector<RefId> mutated;
  std::map<RefId, PropList> exit_props;
};

// Maps an activation to its context type from the invocation iid and the
// declaration iid, using L_T, L_D and loc_C.
class ContextClassifier {
 public:
  ContextClassifier(const AstForest& forest, const CallSiteSet& sites);

  ContextType classify(Iid decl_iid, std::optional<Iid> inv_id) const;

 private:
  const AstForest& forest_;
  const CallSiteSet& sites_;
};

}  // namespace carve
