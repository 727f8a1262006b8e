#include "carve/callsites.hpp"

#include <algorithm>

#include "carve/error.hpp"

namespace carve {

namespace {

bool is_test_decl(const AstNode& n) { return n.attr_flag("isTest"); }

struct DeclIndex {
  std::vector<const AstNode*> decls;  // non-test FunctionDecls

  explicit DeclIndex(const AstForest& forest) {
    for (const AstNode* d : forest.function_decls())
      if (!is_test_decl(*d)) decls.push_back(d);
  }

  std::vector<const AstNode*> by_name(const std::string& name) const {
    std::vector<const AstNode*> out;
    for (const AstNode* d : decls)
      if (d->attr_string("name") == name) out.push_back(d);
    return out;
  }

  std::vector<const AstNode*> methods_named(const std::string& method) const {
    std::vector<const AstNode*> out;
    for (const AstNode* d : decls)
      if (d->has_attr("owner") && d->attr_string("method") == method) out.push_back(d);
    return out;
  }
};

std::string join_names(const std::vector<const AstNode*>& decls) {
  std::string out;
  for (const AstNode* d : decls) {
    if (!out.empty()) out += ", ";
    out += d->attr_string("name") + " (iid " + std::to_string(d->iid) + ")";
  }
  return out;
}

}  // namespace

bool path_under(const std::string& path, const std::string& dir) {
  if (dir.empty() || dir == ".") return true;
  std::string d = std::filesystem::path(dir).lexically_normal().generic_string();
  while (!d.empty() && d.back() == '/') d.pop_back();
  std::string p = std::filesystem::path(path).lexically_normal().generic_string();
  return p.size() > d.size() && p.compare(0, d.size(), d) == 0 && p[d.size()] == '/';
}

bool CallSiteSet::is_test(Iid iid) const {
  return std::find(test_iids.begin(), test_iids.end(), iid) != test_iids.end();
}

bool CallSiteSet::is_site(Iid iid) const {
  return std::find(site_iids.begin(), site_iids.end(), iid) != site_iids.end();
}

const Dependency* CallSiteSet::dependency_of_site(Iid site) const {
  for (const auto& d : deps)
    if (std::find(d.sites.begin(), d.sites.end(), site) != d.sites.end()) return &d;
  return nullptr;
}

Iid resolve_target(const AstForest& forest, const TargetSpec& spec) {
  std::vector<const AstNode*> matches;
  for (const AstNode* d : forest.function_decls()) {
    if (is_test_decl(*d) || d->attr_string("name") != spec.component_name) continue;
    if (!spec.component_file.empty() && forest.file_of(d->iid) != spec.component_file) continue;
    matches.push_back(d);
  }
  if (matches.empty())
    throw Error(ErrorKind::NotFound, "no declaration of '" + spec.component_name + "' in " +
                                         (spec.component_file.empty() ? "<any file>" : spec.component_file));
  if (matches.size() > 1)
    throw Error(ErrorKind::Ambiguity, "'" + spec.component_name + "' matches " + join_names(matches));
  return matches.front()->iid;
}

CallSiteSet resolve_call_sites(const AstForest& forest, Iid target_iid) {
  const AstNode& target = forest.node(target_iid);
  if (target.kind != NodeKind::FunctionDecl)
    throw Error(ErrorKind::Usage, "target iid " + std::to_string(target_iid) + " is not a FunctionDecl");
  DeclIndex index(forest);
  CallSiteSet out;
  out.target_iid = target_iid;
  out.target_name = target.attr_string("name");
  out.target_loc = iid_to_location(forest, target_iid);

  auto add_site = [&](const AstNode& call, const AstNode& decl) {
    if (decl.iid == target_iid) return;  // self-recursion is not a dependency
    auto it = std::find_if(out.deps.begin(), out.deps.end(),
                           [&](const Dependency& d) { return d.decl_iid == decl.iid; });
    if (it == out.deps.end()) {
      std::string method = decl.attr_string("method");
      out.deps.push_back(Dependency{decl.attr_string("name"), method.empty() ? decl.attr_string("name") : method,
                                    decl.iid, {}});
      it = std::prev(out.deps.end());
    }
    it->sites.push_back(call.iid);
    out.site_iids.push_back(call.iid);
    out.site_locs.push_back(iid_to_location(forest, call.iid));
  };

  auto resolve_one = [&](const AstNode& call) {
    if (call.kind == NodeKind::NewExpr) {
      auto found = index.by_name(call.attr_string("class"));
      if (found.size() == 1) add_site(call, *found.front());
      else if (found.size() > 1)
        out.diagnostics.push_back("constructor '" + call.attr_string("class") + "' at iid " +
                                  std::to_string(call.iid) + " is ambiguous: " + join_names(found));
      return;
    }
    const AstNode& callee = call.children.at(0);
    if (callee.kind == NodeKind::NameExpr) {
      auto found = index.by_name(callee.attr_string("name"));
      if (found.size() == 1) add_site(call, *found.front());
      else if (found.size() > 1)
        out.diagnostics.push_back("call '" + callee.attr_string("name") + "' at iid " +
                                  std::to_string(call.iid) + " is ambiguous: " + join_names(found));
      return;
    }
    if (callee.kind != NodeKind::AttributeExpr) return;
    const std::string method = callee.attr_string("name");
    const AstNode& base = callee.children.at(0);
    if (base.kind == NodeKind::NameExpr) {
      auto statics = index.by_name(base.attr_string("name") + "." + method);
      if (statics.size() == 1) {
        add_site(call, *statics.front());
        return;
      }
    }
    auto found = index.methods_named(method);
    if (found.size() == 1) {
      add_site(call, *found.front());
    } else if (found.size() > 1) {
      out.diagnostics.push_back("method call '." + method + "' at iid " + std::to_string(call.iid) +
                                " matches several declarations and is excluded: " + join_names(found));
    }
  };

  auto walk = [&](auto&& self, const AstNode& n) -> void {
    if (n.kind == NodeKind::CallExpr || n.kind == NodeKind::NewExpr) resolve_one(n);
    for (const auto& c : n.children) self(self, c);
  };
  for (const auto& c : target.children) walk(walk, c);
  return out;
}

std::vector<Iid> collect_test_iids(const AstForest& forest, const std::string& test_dir) {
  std::vector<Iid> out;
  for (const AstNode* d : forest.function_decls())
    if (is_test_decl(*d) && path_under(forest.file_of(d->iid), test_dir)) out.push_back(d->iid);
  return out;
}

std::vector<AstLocation> collect_test_locations(const AstForest& forest, const std::string& test_dir) {
  std::vector<AstLocation> out;
  for (Iid iid : collect_test_iids(forest, test_dir)) out.push_back(iid_to_location(forest, iid));
  return out;
}

CallSiteSet resolve(const AstForest& forest, const TargetSpec& spec) {
  CallSiteSet out = resolve_call_sites(forest, resolve_target(forest, spec));
  out.test_iids = collect_test_iids(forest, spec.test_dir);
  for (Iid iid : out.test_iids) out.test_locs.push_back(iid_to_location(forest, iid));
  return out;
}

Json call_sites_to_json(const CallSiteSet& s) {
  Json deps = Json::array();
  for (const auto& d : s.deps)
    deps.push_back(Json{{"name", d.name}, {"method", d.method}, {"declIid", d.decl_iid}, {"sites", d.sites}});
  auto located = [](const std::vector<Iid>& iids, const std::vector<AstLocation>& locs) {
    Json arr = Json::array();
    for (std::size_t i = 0; i < iids.size(); ++i) {
      Json j = location_to_json(locs.at(i));
      j["iid"] = iids[i];
      arr.push_back(std::move(j));
    }
    return arr;
  };
  return Json{{"version", 1},
              {"target", s.target_name},
              {"targetIid", s.target_iid},
              {"loc_C", location_to_json(s.target_loc)},
              {"deps", std::move(deps)},
              {"L_T", located(s.test_iids, s.test_locs)},
              {"L_D", located(s.site_iids, s.site_locs)},
              {"diagnostics", s.diagnostics}};
}

CallSiteSet call_sites_from_json(const Json& v) {
  try {
    CallSiteSet s;
    s.target_name = v.at("target").get<std::string>();
    s.target_iid = v.at("targetIid").get<Iid>();
    s.target_loc = location_from_json(v.at("loc_C"));
    for (const auto& d : v.at("deps"))
      s.deps.push_back(Dependency{d.at("name").get<std::string>(), d.at("method").get<std::string>(),
                                  d.at("declIid").get<Iid>(), d.at("sites").get<std::vector<Iid>>()});
    for (const auto& t : v.at("L_T")) {
      s.test_iids.push_back(t.at("iid").get<Iid>());
      s.test_locs.push_back(location_from_json(t));
    }
    for (const auto& t : v.at("L_D")) {
      s.site_iids.push_back(t.at("iid").get<Iid>());
      s.site_locs.push_back(location_from_json(t));
    }
    if (v.contains("diagnostics")) s.diagnostics = v["diagnostics"].get<std::vector<std::string>>();
    return s;
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::Schema, std::string("resolution report: ") + e.what());
  }
}

}  // namespace carve
