#include "carve/filter.hpp"

#include <algorithm>

#include "carve/error.hpp"
#include "carve/surface.hpp"

namespace carve {

std::string_view to_string(ContextType type) {
  switch (type) {
    case ContextType::Root: return "ROOT";
    case ContextType::Test: return "TEST";
    case ContextType::Cmp: return "CMP";
    case ContextType::Dep: return "DEP";
    case ContextType::Other: return "OTHER";
  }
  return "?";
}

std::optional<ContextType> context_type_from_string(std::string_view text) {
  for (ContextType t : {ContextType::Root, ContextType::Test, ContextType::Cmp, ContextType::Dep,
                        ContextType::Other})
    if (to_string(t) == text) return t;
  return std::nullopt;
}

ContextClassifier::ContextClassifier(const AstForest& forest, const CallSiteSet& sites)
    : forest_(forest), sites_(sites) {}

ContextType ContextClassifier::classify(Iid decl_iid, std::optional<Iid> inv_id) const {
  if (inv_id && sites_.is_test(*inv_id)) return ContextType::Test;
  if (inv_id && sites_.is_site(*inv_id)) return ContextType::Dep;
  if (forest_.contains(decl_iid) && belongs_to_ast(sites_.target_loc, forest_, decl_iid))
    return ContextType::Cmp;
  return ContextType::Other;
}

ContextStack::ContextStack() {
  ExecutionContext root;
  root.invocation_iid = 1;
  root.type = ContextType::Root;
  stack_.push_back(std::move(root));
}

void ContextStack::push(ExecutionContext ctx) { stack_.push_back(std::move(ctx)); }

ExecutionContext ContextStack::pop() {
  if (stack_.size() <= 1) throw Error(ErrorKind::Structure, "function exit would pop the ROOT context");
  ExecutionContext top = std::move(stack_.back());
  stack_.pop_back();
  return top;
}

const ExecutionContext* ContextStack::find_test_context() const {
  for (auto it = stack_.rbegin(); it != stack_.rend(); ++it)
    if (it->type == ContextType::Test) return &*it;
  return nullptr;
}

ExecutionContext activate_execution_context(ContextStack& stack, const ContextClassifier& classifier,
                                            Iid decl_iid, std::optional<Iid> inv_id, Iid func_id) {
  ExecutionContext ctx;
  ctx.id = stack.depth();
  ctx.invocation_iid = inv_id.value_or(0);
  ctx.func_id = func_id;
  ctx.type = classifier.classify(decl_iid, inv_id);
  ctx.parent = stack.top().id;
  stack.push(ctx);
  return ctx;
}

TestFilter::TestFilter(const AstForest& forest, const CallSiteSet& sites)
    : forest_(forest), sites_(sites), classifier_(forest, sites) {}

void TestFilter::on_event(const TraceEvent& e) {
  switch (e.ev) {
    case EventKind::InvokeFunPre:
      inv_id_ = e.iid;
      break;
    case EventKind::FunctionEnter:
      activate_execution_context(stack_, classifier_, e.iid, inv_id_, e.func_id.value_or(e.iid));
      break;
    case EventKind::FunctionExit:
      stack_.pop();
      break;
    case EventKind::InvokeFun: {
      if (!sites_.is_site(e.iid) || stack_.active_type() != ContextType::Cmp) break;
      const ExecutionContext* test = stack_.find_test_context();
      if (!test) {
        result_.warnings.push_back("trace line " + std::to_string(e.line) + ": dependency call at iid " +
                                   std::to_string(e.iid) + " has no enclosing test; ignored");
        break;
      }
      tests_.insert(test->func_id);
      result_.reached_sites[test->func_id].insert(e.iid);
      break;
    }
    default:
      break;
  }
}

FilterResult TestFilter::finish() {
  FilterResult out = result_;
  // Source order: the order of L_T.
  for (Iid t : sites_.test_iids)
    if (tests_.contains(t)) out.tests.push_back(t);
  for (Iid t : tests_)
    if (std::find(out.tests.begin(), out.tests.end(), t) == out.tests.end()) out.tests.push_back(t);
  for (Iid t : out.tests) out.test_locs.push_back(iid_to_location(forest_, t));
  return out;
}

FilterResult filter_tests(const std::vector<TraceEvent>& events, const AstForest& forest,
                          const CallSiteSet& sites) {
  TestFilter filter(forest, sites);
  for (const auto& e : events) filter.on_event(e);
  return filter.finish();
}

std::optional<AstForest> merge_filtered_tests(const FilterResult& filtered, const AstForest& forest,
                                              const std::string& test_dir) {
  if (filtered.tests.empty()) return std::nullopt;
  std::vector<SourceFile> files;
  std::vector<std::string> contributing;
  for (Iid t : filtered.tests) {
    const std::string& f = forest.file_of(t);
    if (std::find(contributing.begin(), contributing.end(), f) == contributing.end())
      contributing.push_back(f);
  }
  std::sort(contributing.begin(), contributing.end());

  AstNode merged;
  merged.kind = NodeKind::Module;
  merged.iid = forest.max_iid() + 1;
  merged.attrs = {{"merged", true}};
  std::vector<std::string> seen_imports;
  std::vector<AstNode> decls;
  for (const auto& file : forest.files()) {
    bool has_tests = std::any_of(file.root.children.begin(), file.root.children.end(),
                                 [](const AstNode& n) { return n.attr_flag("isTest"); });
    if (!has_tests || !path_under(file.path, test_dir)) {
      files.push_back(file);
      continue;
    }
    if (std::find(contributing.begin(), contributing.end(), file.path) == contributing.end()) continue;
    for (const auto& item : file.root.children) {
      if (item.attr_flag("isImport")) {
        std::string text = surface::render_statement(item);
        if (std::find(seen_imports.begin(), seen_imports.end(), text) != seen_imports.end()) continue;
        seen_imports.push_back(text);
        merged.children.push_back(item);
      } else if (item.kind == NodeKind::FunctionDecl) {
        bool keep = !item.attr_flag("isTest") ||
                    std::find(filtered.tests.begin(), filtered.tests.end(), item.iid) != filtered.tests.end();
        if (!keep) continue;
        decls.push_back(item);
        // Generated tests import helpers from where they really live.
        decls.back().attrs["origin"] = file.path;
      }
    }
  }
  std::sort(decls.begin(), decls.end(), [](const AstNode& a, const AstNode& b) { return a.iid < b.iid; });
  for (auto& d : decls) merged.children.push_back(std::move(d));

  merged.span = merged.children.empty() ? Span{{1, 1}, {1, 1}} : merged.children.front().span;
  for (const auto& c : merged.children) {
    merged.span.start = std::min(merged.span.start, c.span.start);
    merged.span.end = std::max(merged.span.end, c.span.end);
  }
  std::string dir = test_dir == "." ? std::string() : test_dir;
  while (!dir.empty() && dir.back() == '/') dir.pop_back();
  files.push_back(SourceFile{dir.empty() ? kMergedModuleName : dir + "/" + kMergedModuleName,
                             std::move(merged)});
  return AstForest(std::move(files));
}

Json filter_result_to_json(const FilterResult& r) {
  Json tests = Json::array();
  for (std::size_t i = 0; i < r.tests.size(); ++i) {
    Json j = location_to_json(r.test_locs.at(i));
    j["iid"] = r.tests[i];
    auto it = r.reached_sites.find(r.tests[i]);
    j["reachedSites"] = it == r.reached_sites.end() ? Json::array() : Json(it->second);
    tests.push_back(std::move(j));
  }
  return Json{{"version", 1}, {"T_C", std::move(tests)}, {"warnings", r.warnings}};
}

FilterResult filter_result_from_json(const Json& v) {
  try {
    FilterResult r;
    for (const auto& t : v.at("T_C")) {
      Iid iid = t.at("iid").get<Iid>();
      r.tests.push_back(iid);
      r.test_locs.push_back(location_from_json(t));
      auto sites = t.at("reachedSites").get<std::vector<Iid>>();
      r.reached_sites[iid] = std::set<Iid>(sites.begin(), sites.end());
    }
    if (v.contains("warnings")) r.warnings = v["warnings"].get<std::vector<std::string>>();
    return r;
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::Schema, std::string("filter report: ") + e.what());
  }
}

}  // namespace carve
