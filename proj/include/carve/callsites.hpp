#pragma once

// Static resolution of the target component and the call sites of its
// direct dependencies.

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "carve/ast.hpp"

namespace carve {

struct TargetSpec {
  std::string component_name;  // "fn" or "Type.method"
  std::string component_file;  // snapshot-relative path
  std::string production_dir;
  std::string test_dir;
};

struct Dependency {
  std::string name;    // qualified declaration name
  std::string method;  // short name, used for test naming
  Iid decl_iid = 0;
  std::vector<Iid> sites;  // call-site iids inside C, source order
};

struct CallSiteSet {
  AstLocation target_loc;
  Iid target_iid = 0;
  std::string target_name;
  std::vector<Dependency> deps;  // declaration order
  std::vector<AstLocation> test_locs;
  std::vector<Iid> test_iids;
  std::vector<AstLocation> site_locs;
  std::vector<Iid> site_iids;  // source order
  std::vector<std::string> diagnostics;

  std::size_t total_sites() const { return site_iids.size(); }
  bool is_test(Iid iid) const;
  bool is_site(Iid iid) const;
  const Dependency* dependency_of_site(Iid site) const;
};

Iid resolve_target(const AstForest& forest, const TargetSpec& spec);
CallSiteSet resolve_call_sites(const AstForest& forest, Iid target_iid);
// Test-case functions (attrs.isTest) in files under test_dir, source order.
std::vector<AstLocation> collect_test_locations(const AstForest& forest, const std::string& test_dir);
std::vector<Iid> collect_test_iids(const AstForest& forest, const std::string& test_dir);

// resolve_target + resolve_call_sites + test collection.
CallSiteSet resolve(const AstForest& forest, const TargetSpec& spec);

Json call_sites_to_json(const CallSiteSet& sites);
CallSiteSet call_sites_from_json(const Json& value);

bool path_under(const std::string& path, const std::string& dir);

}  // namespace carve
