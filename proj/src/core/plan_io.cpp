#include "carve/error.hpp"
#include "carve/testgen.hpp"

namespace carve {

namespace {

Json provenance_to_json(const Provenance& p) {
  return Json{{"testIid", p.test_iid},   {"test", location_to_json(p.test_loc)}, {"path", p.path},
              {"statement", p.statement}, {"siteIid", p.site_iid},               {"context", p.context}};
}

Provenance provenance_from_json(const Json& j) {
  return Provenance{j.at("testIid").get<Iid>(),          location_from_json(j.at("test")),
                    j.at("path").get<std::size_t>(),      j.at("statement").get<std::size_t>(),
                    j.at("siteIid").get<Iid>(),           j.at("context").get<ContextId>()};
}

}  // namespace

Json plan_to_json(const TestPlan& plan) {
  Json arrange = Json::array();
  for (const auto& s : plan.arrange) arrange.push_back(node_to_json(s));
  Json asserts = Json::array();
  for (const auto& a : plan.asserts)
    asserts.push_back(Json{{"target", node_to_json(a.target)}, {"expected", value_to_json(a.expected)}});
  return Json{{"version", 1},
              {"name", plan.name},
              {"dependency", plan.dependency},
              {"method", plan.method},
              {"imports", plan.imports},
              {"arrange", std::move(arrange)},
              {"act", node_to_json(plan.act)},
              {"asserts", std::move(asserts)},
              {"provenance", provenance_to_json(plan.provenance)}};
}

TestPlan plan_from_json(const Json& v) {
  try {
    TestPlan plan;
    plan.name = v.at("name").get<std::string>();
    plan.dependency = v.at("dependency").get<std::string>();
    plan.method = v.at("method").get<std::string>();
    plan.imports = v.at("imports").get<std::vector<std::string>>();
    for (const auto& s : v.at("arrange")) plan.arrange.push_back(node_from_json(s));
    plan.act = node_from_json(v.at("act"));
    for (const auto& a : v.at("asserts"))
      plan.asserts.push_back(PlanAssert{node_from_json(a.at("target")), value_from_json(a.at("expected"))});
    plan.provenance = provenance_from_json(v.at("provenance"));
    return plan;
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::Schema, std::string("test plan: ") + e.what());
  }
}

Json failure_to_json(const PlanFailure& f) {
  return Json{{"provenance", provenance_to_json(f.provenance)}, {"message", f.message}};
}

}  // namespace carve
