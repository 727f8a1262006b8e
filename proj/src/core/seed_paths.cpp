#include "carve/seed_paths.hpp"

#include <algorithm>
#include <deque>

#include "carve/error.hpp"

namespace carve {

namespace {

void insert_sorted(std::vector<RefId>& v, RefId id) {
  auto it = std::lower_bound(v.begin(), v.end(), id);
  if (it == v.end() || *it != id) v.insert(it, id);
}

void set_entry(PropList& list, const std::string& name, const Value& v) {
  for (auto& [k, val] : list)
    if (k == name) {
      val = v;
      return;
    }
  list.emplace_back(name, v);
}

}  // namespace

const Value* StatementNode::defined_value(const std::string& name) const {
  for (const auto& [k, v] : defined)
    if (k == name) return &v;
  return nullptr;
}

std::optional<RefId> StatementNode::bound_ref(const std::string& name) const {
  for (const auto& [k, r] : bound)
    if (k == name) return r;
  return std::nullopt;
}

bool Analysis::has_dep(const StatementNode& n) const {
  return std::any_of(n.spawned.begin(), n.spawned.end(),
                     [&](ContextId c) { return contexts.at(c).type == ContextType::Dep; });
}

PathBuilder::PathBuilder(const AstForest& forest, const CallSiteSet& sites,
                         std::optional<std::set<Iid>> only_tests)
    : forest_(forest), sites_(sites), classifier_(forest, sites), only_tests_(std::move(only_tests)) {
  ExecutionContext root;
  root.id = 0;
  root.invocation_iid = 1;
  root.type = ContextType::Root;
  analysis_.contexts.push_back(std::move(root));
  ctx_stack_.push_back(0);
}

bool PathBuilder::skipped() const {
  ContextType t = analysis_.contexts.at(ctx_stack_.back()).type;
  return t == ContextType::Dep || t == ContextType::Other;
}

StatementNode& PathBuilder::node(const Slot& s) {
  if (s.path == kRootPath) return analysis_.root_statements.at(s.index);
  return current_->statements.at(s.index);
}

void PathBuilder::observe(const Value& v) {
  if (!v.is_ref()) return;
  analysis_.refs.get_obj_ref(v);
  std::size_t occ = stmt_stack_.empty() ? 0 : stmt_stack_.back().occurrence;
  born_.try_emplace(v.ref_id(), occ);
}

void PathBuilder::observe_refs(const std::vector<Value>& vs) {
  for (const auto& v : vs) observe(v);
}

bool PathBuilder::under_dep() const {
  return std::any_of(ctx_stack_.begin(), ctx_stack_.end(),
                     [&](ContextId c) { return analysis_.contexts.at(c).type == ContextType::Dep; });
}

void PathBuilder::note_mutation(RefId base) {
  for (ContextId c : ctx_stack_) {
    auto& ctx = analysis_.contexts.at(c);
    if (ctx.type == ContextType::Dep) insert_sorted(ctx.mutated, base);
  }
}

void PathBuilder::add_used(const Value& v) {
  if (v.is_ref() && !stmt_stack_.empty()) insert_sorted(node(stmt_stack_.back()).used, v.ref_id());
}

void PathBuilder::add_mutated(RefId ref) {
  if (!stmt_stack_.empty()) insert_sorted(node(stmt_stack_.back()).mutated, ref);
}

void PathBuilder::on_event(const TraceEvent& e) {
  if (finished_) throw Error(ErrorKind::Usage, "path builder already finished");
  switch (e.ev) {
    case EventKind::StmtStart: start_statement(e); break;
    case EventKind::StmtEnd: end_statement(e); break;
    case EventKind::FunctionEnter: function_enter(e); break;
    case EventKind::FunctionExit: function_exit(e); break;
    case EventKind::InvokeFunPre:
      inv_id_ = e.iid;
      if (e.base) observe(*e.base);
      observe_refs(e.args);
      break;
    default: instruction(e); break;
  }
}

void PathBuilder::start_statement(const TraceEvent& e) {
  if (skipped()) return;
  ContextId ctx = ctx_stack_.back();
  StatementNode n;
  n.iid = e.iid;
  n.ctx = ctx;
  Slot slot{kRootPath, 0, ctx, ++occurrences_};
  if (!current_ || analysis_.contexts.at(ctx).type == ContextType::Root) {
    slot.index = analysis_.root_statements.size();
    n.last = slot.index;
    analysis_.root_statements.push_back(std::move(n));
  } else {
    slot.path = analysis_.paths.size();
    slot.index = current_->statements.size();
    n.last = slot.index;
    current_->statements.push_back(std::move(n));
  }
  analysis_.contexts.at(ctx).statements.push_back(StatementRef{slot.path, slot.index});
  stmt_stack_.push_back(slot);
}

void PathBuilder::end_statement(const TraceEvent& e) {
  if (skipped()) return;
  if (stmt_stack_.empty())
    throw Error(ErrorKind::Structure, "trace line " + std::to_string(e.line) + ": stmtEnd with empty statement stack");
  const Slot& top = stmt_stack_.back();
  std::size_t size = top.path == kRootPath ? analysis_.root_statements.size() : current_->statements.size();
  node(top).last = size - 1;
  stmt_stack_.pop_back();
}

void PathBuilder::function_enter(const TraceEvent& e) {
  ContextId parent = ctx_stack_.back();
  ExecutionContext ctx;
  ctx.id = analysis_.contexts.size();
  ctx.invocation_iid = inv_id_.value_or(0);
  ctx.func_id = e.func_id.value_or(e.iid);
  ctx.type = classifier_.classify(e.iid, inv_id_);
  ctx.parent = parent;
  ctx.receiver = e.receiver;
  ctx.args = e.args;
  if (e.receiver) observe(*e.receiver);
  observe_refs(e.args);
  if (ctx.type == ContextType::Test) {
    flush_path();
    current_ = SeedPath{};
    current_->test_iid = ctx.func_id;
    if (forest_.contains(ctx.func_id)) current_->test_loc = iid_to_location(forest_, ctx.func_id);
  }
  if (!stmt_stack_.empty() && stmt_stack_.back().ctx == parent)
    node(stmt_stack_.back()).spawned.push_back(ctx.id);
  ctx_stack_.push_back(ctx.id);
  analysis_.contexts.push_back(std::move(ctx));
}

void PathBuilder::function_exit(const TraceEvent& e) {
  if (ctx_stack_.size() <= 1)
    throw Error(ErrorKind::Structure, "trace line " + std::to_string(e.line) + ": functionExit would pop ROOT");
  ExecutionContext& ctx = top_ctx();
  ctx.result = e.result.value_or(Value(Undefined{}));
  if (e.result) observe(*e.result);
  if (ctx.type == ContextType::Dep) {
    // Snapshot of captured property state reachable from the activation's
    // endpoints, three levels deep.
    std::deque<std::pair<RefId, int>> work;
    auto seed = [&](const std::optional<Value>& v) {
      if (v && v->is_ref()) work.emplace_back(v->ref_id(), 0);
    };
    seed(ctx.result);
    seed(ctx.receiver);
    for (const auto& a : ctx.args) seed(a);
    while (!work.empty()) {
      auto [id, depth] = work.front();
      work.pop_front();
      if (ctx.exit_props.contains(id)) continue;
      const ObjRef* ref = analysis_.refs.find(id);
      ctx.exit_props[id] = ref ? ref->props : PropList{};
      if (!ref || depth >= 3) continue;
      for (const auto& [k, v] : ref->props)
        if (v.is_ref()) work.emplace_back(v.ref_id(), depth + 1);
    }
  }
  ctx_stack_.pop_back();
}

void PathBuilder::instruction(const TraceEvent& e) {
  if (e.base) observe(*e.base);
  if (e.value) observe(*e.value);
  if (e.result) observe(*e.result);
  observe_refs(e.args);
  for (const auto& [k, v] : e.fields) observe(v);

  if (e.ev == EventKind::Literal && e.value && e.value->is_ref()) {
    ObjRef* ref = analysis_.refs.get_obj_ref(*e.value);
    ref->shape = e.shape.empty() ? "object" : e.shape;
    if (under_dep())
      for (const auto& [k, v] : e.fields) ref->set_prop(k, v);
  }
  if (e.ev == EventKind::PutField && e.base && e.base->is_ref() && e.value) {
    ObjRef* ref = analysis_.refs.get_obj_ref(*e.base);
    if (under_dep()) {
      ref->set_prop(e.offset, *e.value);
      note_mutation(e.base->ref_id());
    } else {
      // Overwritten outside a dependency: the captured value is stale.
      std::erase_if(ref->props, [&](const auto& p) { return p.first == e.offset; });
    }
    add_mutated(e.base->ref_id());
  }
  if (stmt_stack_.empty()) return;
  if (skipped()) {
    // Reads inside a callee still depend on the state the caller's
    // statement hands over.
    if (e.ev == EventKind::GetField) {
      if (e.base) add_used(*e.base);
      if (e.value) add_used(*e.value);
    }
    return;
  }

  StatementNode& n = node(stmt_stack_.back());
  switch (e.ev) {
    case EventKind::Read:
      if (e.value) add_used(*e.value);
      break;
    case EventKind::Write:
      if (!e.value) break;
      if (e.value->is_ref()) {
        RefId id = e.value->ref_id();
        bool replaced = false;
        for (auto& [k, r] : n.bound)
          if (k == e.name) r = id, replaced = true;
        if (!replaced) n.bound.emplace_back(e.name, id);
        if (born_.at(id) == stmt_stack_.back().occurrence) add_mutated(id);
      } else {
        set_entry(n.defined, e.name, *e.value);
      }
      break;
    case EventKind::GetField:
    case EventKind::PutField:
      if (e.ev == EventKind::GetField && e.base) add_used(*e.base);
      if (e.value) add_used(*e.value);
      break;
    case EventKind::InvokeFun:
      if (e.base) add_used(*e.base);
      if (e.result) add_used(*e.result);
      for (const auto& a : e.args) add_used(a);
      break;
    case EventKind::Literal:
      if (e.value && e.value->is_ref()) add_mutated(e.value->ref_id());
      break;
    default:
      break;
  }
}

void PathBuilder::flush_path() {
  if (!current_) return;
  SeedPath path = std::move(*current_);
  current_.reset();
  const std::size_t index = analysis_.paths.size();
  bool wanted = !only_tests_ || only_tests_->contains(path.test_iid);
  bool has_dep = std::any_of(path.statements.begin(), path.statements.end(),
                             [&](const StatementNode& n) { return analysis_.has_dep(n); });
  if (wanted && has_dep) {
    analysis_.paths.push_back(std::move(path));
    return;
  }
  if (wanted)
    analysis_.warnings.push_back("path of test iid " + std::to_string(path.test_iid) +
                                 " reaches no dependency context; discarded");
  for (auto& ctx : analysis_.contexts)
    std::erase_if(ctx.statements, [&](const StatementRef& r) { return r.path == index; });
}

Analysis PathBuilder::finish() {
  if (finished_) throw Error(ErrorKind::Usage, "path builder already finished");
  if (ctx_stack_.size() != 1)
    throw Error(ErrorKind::Structure, "trace ended with " + std::to_string(ctx_stack_.size() - 1) +
                                          " open function contexts");
  flush_path();
  finished_ = true;
  return std::move(analysis_);
}

Analysis build_seed_paths(const std::vector<TraceEvent>& events, const AstForest& forest,
                          const CallSiteSet& sites, std::optional<std::set<Iid>> only_tests) {
  PathBuilder builder(forest, sites, std::move(only_tests));
  for (const auto& e : events) builder.on_event(e);
  return builder.finish();
}

}  // namespace carve
