#include "carve/testgen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "carve/error.hpp"
#include "carve/surface.hpp"

namespace carve {

namespace {

AstNode make_node(NodeKind kind, Json attrs = Json::object()) {
  AstNode n;
  n.kind = kind;
  n.attrs = std::move(attrs);
  return n;
}

AstNode name_node(const std::string& name) { return make_node(NodeKind::NameExpr, {{"name", name}}); }

bool is_index(const std::string& key) {
  if (key.empty() || key.size() > 9) return false;
  return std::all_of(key.begin(), key.end(), [](char c) { return c >= '0' && c <= '9'; }) &&
         (key == "0" || key[0] != '0');
}

const AstNode* find_node(const AstNode& n, Iid iid) {
  if (n.iid == iid) return &n;
  for (const auto& c : n.children)
    if (const AstNode* f = find_node(c, iid)) return f;
  return nullptr;
}

const std::string& decl_file(const AstForest& forest, const AstNode& d) {
  if (d.attrs.contains("origin") && d.attrs["origin"].is_string()) return d.attrs["origin"].get_ref<const std::string&>();
  return forest.file_of(d.iid);
}

// Names visible everywhere in a snapshot: free functions, constructors and
// the owners of methods. Maps each to the file that declares it.
struct Globals {
  std::map<std::string, std::string> file_of;
  std::map<std::string, std::vector<std::string>> method_files;

  explicit Globals(const AstForest& forest) {
    std::vector<const AstNode*> decls;
    for (const AstNode* d : forest.function_decls())
      if (!d->attr_flag("isTest")) decls.push_back(d);
    for (const AstNode* d : decls)
      if (!d->has_attr("owner")) file_of.try_emplace(d->attr_string("name"), decl_file(forest, *d));
    for (const AstNode* d : decls) {
      if (!d->has_attr("owner")) continue;
      file_of.try_emplace(d->attr_string("owner"), decl_file(forest, *d));
      auto& files = method_files[d->attr_string("method")];
      const std::string& f = decl_file(forest, *d);
      if (std::find(files.begin(), files.end(), f) == files.end()) files.push_back(f);
    }
  }

  bool contains(const std::string& name) const { return file_of.contains(name); }
};

using Key = std::pair<std::size_t, int>;  // (path index, 0 = synthesized binding, 1 = statement)

class Generator {
 public:
  Generator(const Analysis& a, const AstForest& forest, const CallSiteSet& sites, const Globals& globals,
            const FlowSlice& slice, ContextId ctx)
      : a_(a),
        forest_(forest),
        sites_(sites),
        globals_(globals),
        slice_(slice),
        ctx_(a.context(ctx)),
        path_(a.paths.at(slice.path)) {}

  TestPlan run() {
    const std::size_t k = slice_.seed;
    const StatementNode& seed = path_.statements.at(k);
    if (ctx_.type != ContextType::Dep) fail(ErrorKind::Usage, "context is not a dependency activation");
    const Dependency* dep = sites_.dependency_of_site(ctx_.invocation_iid);
    if (!dep) fail(ErrorKind::Integrity, "invocation iid " + std::to_string(ctx_.invocation_iid) + " is not a call site");

    const AstNode* call = find_node(forest_.node(seed.iid), ctx_.invocation_iid);
    if (!call) fail(ErrorKind::Integrity, "call site " + std::to_string(ctx_.invocation_iid) + " not under statement " +
                                              std::to_string(seed.iid));
    AstNode act_call = amend(*call, k);

    for (std::size_t l : arrange_members()) include(l);

    TestPlan plan;
    plan.dependency = dep->name;
    plan.method = dep->method;
    plan.provenance = Provenance{path_.test_iid, path_.test_loc, slice_.path, k, ctx_.invocation_iid, ctx_.id};

    const Value result = ctx_.result.value_or(Value(Undefined{}));
    if (result.is_undefined()) {
      plan.act = make_node(NodeKind::ExprStmt);
      plan.act.children.push_back(act_call);
    } else {
      plan.act = make_node(NodeKind::AssignStmt, {{"decl", "const"}, {"op", "="}});
      plan.act.children.push_back(name_node(kActualResult));
      plan.act.children.push_back(act_call);
    }
    plan.asserts = asserts(result, act_call);
    if (plan.asserts.empty()) fail(ErrorKind::Resolution, "nothing assertable for " + dep->name);

    plan.arrange = arrange();
    plan.imports = imports(plan, *dep);
    return plan;
  }

 private:
  struct Use {
    Key at;
    std::string name;
    Key binding;
  };

  [[noreturn]] void fail(ErrorKind kind, const std::string& msg) const { throw Error(kind, msg); }

  // Slice members minus the statements still executing at the seed (the
  // test statement that called the component, loop headers) and whatever is
  // only reachable through them: replaying those would re-run the component.
  std::vector<std::size_t> arrange_members() const {
    const std::size_t k = slice_.seed;
    auto open_at_seed = [&](std::size_t m) { return m < k && path_.statements[m].last >= k; };
    std::set<std::size_t> keep{k};
    std::vector<std::size_t> work{k};
    while (!work.empty()) {
      std::size_t n = work.back();
      work.pop_back();
      for (const auto& [l, to] : slice_.edges)
        if (to == n && !open_at_seed(l) && keep.insert(l).second) work.push_back(l);
    }
    std::vector<std::size_t> out;
    for (std::size_t m : slice_.members)
      if (keep.contains(m)) out.push_back(m);
    return out;
  }

  // --- amendment -----------------------------------------------------------

  void substitute(AstNode& n, const std::vector<ContextId>& spawned, std::vector<char>& taken) const {
    if (n.kind == NodeKind::CallExpr || n.kind == NodeKind::NewExpr) {
      for (std::size_t s = 0; s < spawned.size(); ++s) {
        const auto& c = a_.context(spawned[s]);
        if (taken[s] || c.invocation_iid != n.iid) continue;
        taken[s] = 1;
        for (std::size_t i = 1; i < n.children.size() && i - 1 < c.args.size(); ++i)
          if (!c.args[i - 1].is_ref()) n.children[i] = literal_node(c.args[i - 1]);
        break;
      }
    }
    for (auto& c : n.children) substitute(c, spawned, taken);
  }

  // Replaced nodes are recorded in `bound`: they name the receiver in the
  // test's scope and must not be resolved again inside the callee.
  void replace_self(AstNode& n, std::size_t j, Key at, std::set<const AstNode*>& bound) {
    if (n.kind == NodeKind::SelfExpr) {
      const auto& ctx = a_.context(path_.statements[j].ctx);
      if (!ctx.receiver || !ctx.receiver->is_ref())
        fail(ErrorKind::Resolution, "'this' at iid " + std::to_string(n.iid) + " has no object receiver");
      if (j == 0) fail(ErrorKind::Resolution, "'this' receiver is never bound to a variable");
      auto [name, m] = resolve_id_for_ref(ctx.receiver->ref_id(), path_, j - 1);
      n = name_node(name);
      bound.insert(&n);
      uses_.push_back(Use{at, name, Key{m, 1}});
      include(m);
      return;
    }
    for (auto& c : n.children) replace_self(c, j, at, bound);
  }

  void collect_free(AstNode& n, std::map<std::string, std::vector<AstNode*>>& out, std::vector<std::string>& order,
                    const std::set<const AstNode*>& bound) const {
    auto use = [&](AstNode& name) {
      if (bound.contains(&name)) return;
      std::string id = name.attr_string("name");
      if (globals_.contains(id)) return;
      if (!out.contains(id)) order.push_back(id);
      out[id].push_back(&name);
    };
    switch (n.kind) {
      case NodeKind::NameExpr:
        use(n);
        return;
      case NodeKind::CallExpr:
        if (n.children.at(0).kind != NodeKind::NameExpr) collect_free(n.children[0], out, order, bound);
        for (std::size_t i = 1; i < n.children.size(); ++i) collect_free(n.children[i], out, order, bound);
        return;
      case NodeKind::NewExpr:
        for (std::size_t i = 1; i < n.children.size(); ++i) collect_free(n.children[i], out, order, bound);
        return;
      case NodeKind::AssignStmt:
        if (n.children.at(0).kind == NodeKind::NameExpr) {
          if (n.attr_string("op") != "=") use(n.children[0]);
        } else {
          collect_free(n.children[0], out, order, bound);
        }
        collect_free(n.children.at(1), out, order, bound);
        return;
      default:
        for (auto& c : n.children) collect_free(c, out, order, bound);
    }
  }

  std::size_t first_index_of_ctx(ContextId c, std::size_t upto) const {
    std::size_t first = upto;
    for (std::size_t i = upto + 1; i-- > 0;)
      if (path_.statements[i].ctx == c) first = i;
    return first;
  }

  void resolve_free(AstNode& stmt, std::size_t j, Key at, const std::set<const AstNode*>& bound) {
    std::map<std::string, std::vector<AstNode*>> free;
    std::vector<std::string> order;
    collect_free(stmt, free, order, bound);
    const ContextId c = path_.statements[j].ctx;
    for (const std::string& id : order) {
      bool done = false;
      for (std::size_t m = j; m-- > 0 && !done;) {
        const StatementNode& s = path_.statements[m];
        if (s.ctx != c) continue;
        if (const Value* v = s.defined_value(id)) {
          synthesize(Key{m, 0}, id, *v);
          uses_.push_back(Use{at, id, Key{m, 0}});
          done = true;
        } else if (s.bound_ref(id)) {
          uses_.push_back(Use{at, id, Key{m, 1}});
          include(m);
          done = true;
        }
      }
      if (done) continue;
      // Parameters of the activation that executed statement j.
      const auto& ctx = a_.context(c);
      std::optional<std::size_t> param;
      if (forest_.contains(ctx.func_id)) {
        const AstNode& decl = forest_.node(ctx.func_id);
        std::size_t index = 0;
        for (const auto& ch : decl.children) {
          if (ch.kind != NodeKind::Param) continue;
          if (ch.attr_string("name") == id) param = index;
          ++index;
        }
      }
      if (!param)
        fail(ErrorKind::Resolution, "identifier '" + id + "' at statement iid " +
                                        std::to_string(path_.statements[j].iid) + " has no binding");
      Value v = *param < ctx.args.size() ? ctx.args[*param] : Value(Undefined{});
      std::size_t first = first_index_of_ctx(c, j);
      if (!v.is_ref()) {
        synthesize(Key{first, 0}, id, v);
        uses_.push_back(Use{at, id, Key{first, 0}});
        continue;
      }
      if (first == 0) fail(ErrorKind::Resolution, "argument '" + id + "' is never bound to a variable");
      auto [name, m] = resolve_id_for_ref(v.ref_id(), path_, first - 1);
      for (AstNode* n : free[id]) n->attrs["name"] = name;
      uses_.push_back(Use{at, name, Key{m, 1}});
      include(m);
    }
  }

  AstNode amend(const AstNode& original, std::size_t j) {
    AstNode n = original;
    const auto& spawned = path_.statements[j].spawned;
    std::vector<char> taken(spawned.size(), 0);
    substitute(n, spawned, taken);
    std::set<const AstNode*> bound;
    replace_self(n, j, Key{j, 1}, bound);
    resolve_free(n, j, Key{j, 1}, bound);
    return n;
  }

  void synthesize(Key key, const std::string& name, const Value& v) {
    auto [it, inserted] = synth_.try_emplace({key.first, name}, v);
    if (!inserted && !(it->second == v))
      fail(ErrorKind::Resolution, "conflicting values synthesized for '" + name + "'");
  }

  // Slice statements stand alone; compound headers keep only their condition.
  static std::optional<AstNode> standalone(const AstNode& stmt) {
    auto expr_stmt = [](const AstNode& e) {
      AstNode s = make_node(NodeKind::ExprStmt);
      s.iid = e.iid;
      s.span = e.span;
      s.children.push_back(e);
      return s;
    };
    switch (stmt.kind) {
      case NodeKind::IfStmt:
      case NodeKind::WhileStmt:
        return expr_stmt(stmt.children.at(0));
      case NodeKind::ForStmt:
        return expr_stmt(stmt.children.at(1));
      case NodeKind::ReturnStmt:
        if (stmt.children.empty()) return std::nullopt;
        return expr_stmt(stmt.children[0]);
      default:
        return stmt;
    }
  }

  void include(std::size_t j) {
    if (included_.contains(j)) return;
    included_[j] = std::nullopt;  // in progress; breaks cycles
    std::optional<AstNode> base = standalone(forest_.node(path_.statements[j].iid));
    if (!base) return;
    included_[j] = amend(*base, j);
  }

  // --- arrange -------------------------------------------------------------

  std::vector<AstNode> arrange() {
    struct Item {
      Key key;
      std::string name;  // synthesized items only
      AstNode stmt;
    };
    std::vector<Item> items;
    for (const auto& [pos, v] : synth_) {
      AstNode s = make_node(NodeKind::AssignStmt, {{"decl", "let"}, {"op", "="}});
      s.children.push_back(name_node(pos.second));
      s.children.push_back(literal_node(v));
      items.push_back(Item{Key{pos.first, 0}, pos.second, std::move(s)});
    }
    for (auto& [j, stmt] : included_)
      if (stmt) items.push_back(Item{Key{j, 1}, "", std::move(*stmt)});
    std::stable_sort(items.begin(), items.end(), [](const Item& x, const Item& y) { return x.key < y.key; });

    auto bound_name = [](const AstNode& s) -> std::string {
      if (s.kind == NodeKind::AssignStmt && s.children.at(0).kind == NodeKind::NameExpr)
        return s.children[0].attr_string("name");
      return {};
    };
    std::vector<std::pair<Key, std::string>> bindings;
    for (const auto& it : items) {
      std::string name = bound_name(it.stmt);
      if (name == kActualResult) fail(ErrorKind::Resolution, "arrange rebinds actualResult");
      if (!name.empty()) bindings.emplace_back(it.key, name);
    }
    for (const auto& u : uses_)
      for (const auto& [key, name] : bindings)
        if (name == u.name && u.binding < key && key < u.at)
          fail(ErrorKind::Resolution, "'" + u.name + "' is rebound between its binding and a use");

    std::set<std::string> declared;
    std::vector<AstNode> out;
    for (std::size_t i = 0; i < items.size(); ++i) {
      AstNode s = std::move(items[i].stmt);
      std::string name = bound_name(s);
      if (!name.empty() && s.attr_string("op") == "=") {
        if (declared.insert(name).second) {
          bool rebound = std::any_of(bindings.begin(), bindings.end(), [&](const auto& b) {
            return b.second == name && items[i].key < b.first;
          });
          if (s.attr_string("decl").empty() || (rebound && s.attr_string("decl") == "const")) s.attrs["decl"] = "let";
        } else {
          s.attrs["decl"] = "";
        }
      }
      out.push_back(std::move(s));
    }
    return out;
  }

  // --- assert --------------------------------------------------------------

  AstNode segment(const AstNode& root, RefId owner, const std::string& key) const {
    const ObjRef* ref = a_.refs.find(owner);
    bool list = ref && ref->shape == "list";
    if (!list && surface::is_identifier(key)) {
      AstNode n = make_node(NodeKind::AttributeExpr, {{"name", key}});
      n.children.push_back(root);
      return n;
    }
    AstNode n = make_node(NodeKind::SubscriptExpr);
    n.children.push_back(root);
    if (list && is_index(key)) n.children.push_back(literal_node(Value(static_cast<std::int64_t>(std::stoll(key)))));
    else n.children.push_back(literal_node(Value(key)));
    return n;
  }

  void expand(const AstNode& root, RefId ref, int level, std::set<RefId>& visited, std::vector<PlanAssert>& out) const {
    auto it = ctx_.exit_props.find(ref);
    if (it == ctx_.exit_props.end()) return;
    for (const auto& [k, v] : it->second) {
      AstNode target = segment(root, ref, k);
      if (!v.is_ref()) {
        out.push_back(PlanAssert{std::move(target), v});
      } else if (level + 1 < kAssertDepth && visited.insert(v.ref_id()).second) {
        expand(target, v.ref_id(), level + 1, visited, out);
      }
    }
  }

  bool touches_mutation(RefId ref, int level, std::set<RefId>& seen) const {
    if (std::binary_search(ctx_.mutated.begin(), ctx_.mutated.end(), ref)) return true;
    if (level >= kAssertDepth || !seen.insert(ref).second) return false;
    auto it = ctx_.exit_props.find(ref);
    if (it == ctx_.exit_props.end()) return false;
    for (const auto& [k, v] : it->second)
      if (v.is_ref() && touches_mutation(v.ref_id(), level + 1, seen)) return true;
    return false;
  }

  std::vector<PlanAssert> asserts(const Value& result, const AstNode& call) const {
    std::vector<PlanAssert> out;
    std::set<RefId> visited;
    if (!result.is_undefined() && !result.is_ref()) {
      out.push_back(PlanAssert{name_node(kActualResult), result});
      return out;
    }
    if (result.is_ref()) {
      visited.insert(result.ref_id());
      expand(name_node(kActualResult), result.ref_id(), 0, visited, out);
      return out;
    }
    // No result: the observable effect is on the receiver and the arguments.
    auto operand = [&](const std::optional<Value>& v, const AstNode* expr) {
      if (!v || !v->is_ref() || !expr) return;
      std::set<RefId> seen;
      if (!touches_mutation(v->ref_id(), 0, seen)) return;
      if (!visited.insert(v->ref_id()).second) return;
      expand(*expr, v->ref_id(), 0, visited, out);
    };
    const AstNode* receiver = nullptr;
    if (call.kind == NodeKind::CallExpr && call.children.at(0).kind == NodeKind::AttributeExpr)
      receiver = &call.children[0].children.at(0);
    operand(ctx_.receiver, receiver);
    for (std::size_t i = 0; i < ctx_.args.size(); ++i)
      operand(ctx_.args[i], i + 1 < call.children.size() ? &call.children[i + 1] : nullptr);
    return out;
  }

  // --- imports -------------------------------------------------------------

  void collect_modules(const AstNode& n, std::set<std::string>& out) const {
    auto add = [&](const std::string& name) {
      auto it = globals_.file_of.find(name);
      if (it != globals_.file_of.end()) out.insert(it->second);
    };
    if (n.kind == NodeKind::NewExpr) add(n.attr_string("class"));
    if (n.kind == NodeKind::NameExpr) add(n.attr_string("name"));
    if (n.kind == NodeKind::CallExpr && n.children.at(0).kind == NodeKind::AttributeExpr) {
      auto it = globals_.method_files.find(n.children[0].attr_string("name"));
      if (it != globals_.method_files.end() && it->second.size() == 1) out.insert(it->second.front());
    }
    for (const auto& c : n.children) collect_modules(c, out);
  }

  std::vector<std::string> imports(const TestPlan& plan, const Dependency& dep) const {
    std::set<std::string> out;
    out.insert(sites_.target_loc.file);
    if (forest_.contains(dep.decl_iid)) out.insert(decl_file(forest_, forest_.node(dep.decl_iid)));
    for (const auto& s : plan.arrange) collect_modules(s, out);
    collect_modules(plan.act, out);
    return {out.begin(), out.end()};
  }

  const Analysis& a_;
  const AstForest& forest_;
  const CallSiteSet& sites_;
  const Globals& globals_;
  const FlowSlice& slice_;
  const ExecutionContext& ctx_;
  const SeedPath& path_;
  std::map<std::size_t, std::optional<AstNode>> included_;
  std::map<std::pair<std::size_t, std::string>, Value> synth_;
  std::vector<Use> uses_;
};

std::vector<std::pair<const FlowSlice*, ContextId>> candidates(const Analysis& analysis,
                                                               const std::vector<FlowSlice>& slices) {
  std::vector<std::pair<const FlowSlice*, ContextId>> out;
  for (const auto& s : slices)
    for (ContextId c : analysis.paths.at(s.path).statements.at(s.seed).spawned)
      if (analysis.context(c).type == ContextType::Dep) out.emplace_back(&s, c);
  return out;
}

PlanOutcome generate_one(const Analysis& analysis, const AstForest& forest, const CallSiteSet& sites,
                         const Globals& globals, const FlowSlice& slice, ContextId ctx) {
  try {
    return Generator(analysis, forest, sites, globals, slice, ctx).run();
  } catch (const Error& e) {
    const SeedPath& path = analysis.paths.at(slice.path);
    Provenance p{path.test_iid, path.test_loc, slice.path, slice.seed, analysis.context(ctx).invocation_iid, ctx};
    return PlanFailure{p, e.what()};
  }
}

GenerationResult finalize(std::vector<PlanOutcome> outcomes) {
  GenerationResult out;
  out.candidates = outcomes.size();
  std::set<std::string> seen;
  std::map<std::string, int> seq;
  for (auto& o : outcomes) {
    if (auto* f = std::get_if<PlanFailure>(&o)) {
      out.failures.push_back(std::move(*f));
      continue;
    }
    TestPlan& plan = std::get<TestPlan>(o);
    if (!seen.insert(render_plan_body(plan)).second) {
      ++out.duplicates;
      continue;
    }
    plan.name = plan.method + "-T" + std::to_string(++seq[plan.method]);
    out.plans.push_back(std::move(plan));
  }
  return out;
}

}  // namespace

AstNode literal_node(const Value& v) {
  AstNode n = make_node(NodeKind::Literal);
  std::string text = v.literal_text();
  std::string type = v.type_tag();
  if (type == "ref") throw Error(ErrorKind::Usage, "references have no literal form");
  Json value;
  const auto& s = v.storage();
  if (auto* i = std::get_if<std::int64_t>(&s)) value = *i;
  else if (auto* d = std::get_if<double>(&s)) value = std::isfinite(*d) ? Json(*d) : Json(text);
  else if (auto* b = std::get_if<bool>(&s)) value = *b;
  else if (auto* str = std::get_if<std::string>(&s)) value = *str;
  else value = nullptr;
  n.attrs = {{"type", type}, {"text", text}, {"value", value}};
  return n;
}

std::pair<std::string, std::size_t> resolve_id_for_ref(RefId ref, const SeedPath& path, std::size_t from) {
  if (!path.statements.empty()) {
    for (std::size_t m = std::min(from, path.statements.size() - 1) + 1; m-- > 0;)
      for (const auto& [name, r] : path.statements[m].bound)
        if (r == ref) return {name, m};
  }
  throw Error(ErrorKind::Resolution, "object ref " + std::to_string(ref) + " is never bound to a variable");
}

PlanOutcome generate_plan(const Analysis& analysis, const AstForest& forest, const CallSiteSet& sites,
                          const FlowSlice& slice, ContextId ctx) {
  Globals globals(forest);
  return generate_one(analysis, forest, sites, globals, slice, ctx);
}

GenerationResult generate_all_serial(const Analysis& analysis, const std::vector<FlowSlice>& slices,
                                     const CallSiteSet& sites, const AstForest& forest) {
  Globals globals(forest);
  std::vector<PlanOutcome> outcomes;
  for (auto [slice, ctx] : candidates(analysis, slices))
    outcomes.push_back(generate_one(analysis, forest, sites, globals, *slice, ctx));
  return finalize(std::move(outcomes));
}

GenerationResult generate_all(const Analysis& analysis, const std::vector<FlowSlice>& slices,
                              const CallSiteSet& sites, const AstForest& forest) {
  Globals globals(forest);
  const auto work = candidates(analysis, slices);
  std::vector<PlanOutcome> outcomes(work.size());
  const long n = static_cast<long>(work.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i)
    outcomes[i] = generate_one(analysis, forest, sites, globals, *work[i].first, work[i].second);
  return finalize(std::move(outcomes));
}

std::string render_plan_body(const TestPlan& plan) {
  std::string out;
  for (const auto& s : plan.arrange) out += surface::render_statement(s, 1);
  out += surface::render_statement(plan.act, 1);
  for (const auto& a : plan.asserts)
    out += "  assert_equal(" + surface::render_expression(a.target) + ", " + a.expected.literal_text() + ");\n";
  return out;
}

std::string render_plan(const TestPlan& plan) {
  return "test " + surface::quote_string(plan.name) + " {\n" + render_plan_body(plan) + "}\n";
}

std::string render_plan_file(const std::vector<const TestPlan*>& plans) {
  std::set<std::string> imports;
  for (const TestPlan* p : plans) imports.insert(p->imports.begin(), p->imports.end());
  std::string out;
  for (const auto& m : imports) out += "import " + surface::quote_string(m) + ";\n";
  for (const TestPlan* p : plans) out += "\n" + render_plan(*p);
  return out;
}

}  // namespace carve
