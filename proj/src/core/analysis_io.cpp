#include "carve/error.hpp"
#include "carve/seed_paths.hpp"

namespace carve {

namespace {

Json props_to_json(const PropList& props) {
  Json out = Json::array();
  for (const auto& [k, v] : props) out.push_back(Json::array({k, value_to_json(v)}));
  return out;
}

PropList props_from_json(const Json& j) {
  PropList out;
  for (const auto& p : j) out.emplace_back(p.at(0).get<std::string>(), value_from_json(p.at(1)));
  return out;
}

Json statement_to_json(const StatementNode& n, std::size_t index) {
  Json bound = Json::array();
  for (const auto& [k, r] : n.bound) bound.push_back(Json::array({k, r}));
  return Json{{"n", index},        {"iid", n.iid},         {"ctx", n.ctx},
              {"V", props_to_json(n.defined)}, {"bound", bound}, {"R_u", n.used},
              {"R_d", n.mutated},  {"CTX", n.spawned}, {"last", n.last}};
}

StatementNode statement_from_json(const Json& j) {
  StatementNode n;
  n.iid = j.at("iid").get<Iid>();
  n.ctx = j.at("ctx").get<ContextId>();
  n.defined = props_from_json(j.at("V"));
  for (const auto& b : j.at("bound")) n.bound.emplace_back(b.at(0).get<std::string>(), b.at(1).get<RefId>());
  n.used = j.at("R_u").get<std::vector<RefId>>();
  n.mutated = j.at("R_d").get<std::vector<RefId>>();
  n.spawned = j.at("CTX").get<std::vector<ContextId>>();
  n.last = j.value("last", j.at("n").get<std::size_t>());
  return n;
}

Json opt_value(const std::optional<Value>& v) { return v ? value_to_json(*v) : Json(nullptr); }

std::optional<Value> opt_value_from(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return value_from_json(j);
}

}  // namespace

Json analysis_to_json(const Analysis& a) {
  Json contexts = Json::array();
  for (const auto& c : a.contexts) {
    Json stmts = Json::array();
    for (const auto& r : c.statements)
      stmts.push_back(Json::array({r.path == kRootPath ? Json("root") : Json(r.path), r.index}));
    Json args = Json::array();
    for (const auto& v : c.args) args.push_back(value_to_json(v));
    Json exit_props = Json::array();
    for (const auto& [id, props] : c.exit_props) exit_props.push_back(Json{{"ref", id}, {"props", props_to_json(props)}});
    contexts.push_back(Json{{"id", c.id},
                            {"invocationIid", c.invocation_iid},
                            {"funcId", c.func_id},
                            {"type", to_string(c.type)},
                            {"parent", c.parent ? Json(*c.parent) : Json(nullptr)},
                            {"statements", std::move(stmts)},
                            {"receiver", opt_value(c.receiver)},
                            {"args", std::move(args)},
                            {"result", opt_value(c.result)},
                            {"mutated", c.mutated},
                            {"exitProps", std::move(exit_props)}});
  }
  Json refs = Json::array();
  for (const auto& [id, r] : a.refs.all())
    refs.push_back(Json{{"id", id}, {"shape", r.shape}, {"props", props_to_json(r.props)}});
  Json paths = Json::array();
  for (const auto& p : a.paths) {
    Json stmts = Json::array();
    for (std::size_t i = 0; i < p.statements.size(); ++i) stmts.push_back(statement_to_json(p.statements[i], i));
    Json loc = location_to_json(p.test_loc);
    paths.push_back(Json{{"test", p.test_iid}, {"loc", std::move(loc)}, {"statements", std::move(stmts)}});
  }
  Json roots = Json::array();
  for (std::size_t i = 0; i < a.root_statements.size(); ++i)
    roots.push_back(statement_to_json(a.root_statements[i], i));
  return Json{{"version", 1},          {"paths", std::move(paths)}, {"contexts", std::move(contexts)},
              {"refs", std::move(refs)}, {"rootStatements", std::move(roots)}, {"warnings", a.warnings}};
}

Analysis analysis_from_json(const Json& v) {
  try {
    Analysis a;
    for (const auto& c : v.at("contexts")) {
      ExecutionContext ctx;
      ctx.id = c.at("id").get<ContextId>();
      if (ctx.id != a.contexts.size()) throw Error(ErrorKind::Schema, "analysis: context ids must be dense");
      ctx.invocation_iid = c.at("invocationIid").get<Iid>();
      ctx.func_id = c.at("funcId").get<Iid>();
      auto type = context_type_from_string(c.at("type").get<std::string>());
      if (!type) throw Error(ErrorKind::Schema, "analysis: unknown context type");
      ctx.type = *type;
      if (!c.at("parent").is_null()) ctx.parent = c["parent"].get<ContextId>();
      for (const auto& r : c.at("statements"))
        ctx.statements.push_back(
            StatementRef{r.at(0).is_string() ? kRootPath : r.at(0).get<std::size_t>(), r.at(1).get<std::size_t>()});
      ctx.receiver = opt_value_from(c.at("receiver"));
      for (const auto& arg : c.at("args")) ctx.args.push_back(value_from_json(arg));
      ctx.result = opt_value_from(c.at("result"));
      ctx.mutated = c.at("mutated").get<std::vector<RefId>>();
      for (const auto& ep : c.at("exitProps")) ctx.exit_props[ep.at("ref").get<RefId>()] = props_from_json(ep.at("props"));
      a.contexts.push_back(std::move(ctx));
    }
    for (const auto& r : v.at("refs")) {
      ObjRef* ref = a.refs.get_obj_ref(Value(Ref{r.at("id").get<RefId>()}));
      ref->shape = r.at("shape").get<std::string>();
      ref->props = props_from_json(r.at("props"));
    }
    for (const auto& p : v.at("paths")) {
      SeedPath path;
      path.test_iid = p.at("test").get<Iid>();
      path.test_loc = location_from_json(p.at("loc"));
      for (const auto& s : p.at("statements")) path.statements.push_back(statement_from_json(s));
      a.paths.push_back(std::move(path));
    }
    for (const auto& s : v.at("rootStatements")) a.root_statements.push_back(statement_from_json(s));
    a.warnings = v.at("warnings").get<std::vector<std::string>>();
    return a;
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::Schema, std::string("analysis document: ") + e.what());
  }
}

}  // namespace carve
