#include <gtest/gtest.h>

#include <functional>

#include "carve/ast.hpp"
#include "carve/io.hpp"
#include "carve/surface.hpp"
#include "corpus.hpp"

using namespace carve;
using namespace carve::testing;

namespace {

Json leaf(Iid iid, Span s = {{1, 0}, {1, 1}}) {
  return Json{{"iid", iid},
              {"kind", "NameExpr"},
              {"span", {s.start.line, s.start.col, s.end.line, s.end.col}},
              {"attrs", {{"name", "x"}}},
              {"children", Json::array()}};
}

Json module_doc(Json children, Iid root_iid = 1) {
  Json root{{"iid", root_iid},
            {"kind", "Module"},
            {"span", {1, 0, 9, 0}},
            {"attrs", Json::object()},
            {"children", std::move(children)}};
  return Json{{"version", 1}, {"files", Json::array({Json{{"path", "a.tj"}, {"root", root}}})}};
}

}  // namespace

TEST(Ast, EmptyDocumentHasNoFiles) {
  AstForest f = forest_from_json(Json{{"version", 1}, {"files", Json::array()}});
  EXPECT_TRUE(f.files().empty());
  EXPECT_TRUE(f.function_decls().empty());
  EXPECT_EQ(f.max_iid(), 0);
}

TEST(Ast, RectangleDeclarations) {
  AstForest f = load_ast(project("rectangle").fixtures() / "ast.json");
  std::vector<std::string> names;
  for (const AstNode* d : f.function_decls()) names.push_back(d->attr_string("name"));
  for (const char* want : {"Point", "Point.distanceFrom", "Point.moveAlong", "Rectangle", "Rectangle.normalize",
                           "Rectangle.stretchLongestEdge", "should stretch longest edge"})
    EXPECT_NE(std::find(names.begin(), names.end(), want), names.end()) << want;
  EXPECT_TRUE(find_decl(f, "Rectangle.normalize")->attr_flag("static"));
  EXPECT_TRUE(find_decl(f, "should stretch longest edge")->attr_flag("isTest"));
}

TEST(Ast, ReloadIsByteStable) {
  Json doc = read_json(project("rectangle").fixtures() / "ast.json");
  AstForest f = forest_from_json(doc);
  EXPECT_EQ(forest_to_json(f).dump(), doc.dump());
  AstForest g = forest_from_json(forest_to_json(f));
  EXPECT_EQ(forest_to_json(g).dump(), doc.dump());
}

TEST(Ast, LocationOfRootAndCallSite) {
  AstForest f = load_ast(project("rectangle").fixtures() / "ast.json");
  const SourceFile* rect = nullptr;
  for (const auto& file : f.files())
    if (file.path == "src/rectangle.tj") rect = &file;
  ASSERT_NE(rect, nullptr);
  AstLocation root = iid_to_location(f, rect->root.iid);
  EXPECT_EQ(root.file, "src/rectangle.tj");
  EXPECT_EQ(root.span.start.line, 1);

  auto calls = find_calls(f, "moveAlong");
  ASSERT_EQ(calls.size(), 2u);
  AstLocation first = iid_to_location(f, calls[0]);
  EXPECT_EQ(first.file, "src/rectangle.tj");
  EXPECT_EQ(first.span.start.line, 33);
  EXPECT_EQ(iid_to_location(f, calls[1]).span.start.line, 34);
}

TEST(Ast, UnknownIidIsLookupError) {
  AstForest f = load_ast(project("rectangle").fixtures() / "ast.json");
  EXPECT_EQ(error_kind([&] { iid_to_location(f, f.max_iid() + 1); }), ErrorKind::Lookup);
  EXPECT_EQ(error_kind([&] { f.parent_of(-3); }), ErrorKind::Lookup);
}

TEST(Ast, BelongsToAst) {
  AstForest f = load_ast(project("rectangle").fixtures() / "ast.json");
  const AstNode* target = find_decl(f, "Rectangle.stretchLongestEdge");
  AstLocation loc = iid_to_location(f, target->iid);
  for (Iid c : find_calls(f, "moveAlong")) EXPECT_TRUE(belongs_to_ast(loc, f, c));
  EXPECT_TRUE(belongs_to_ast(loc, f, target->iid));
  const AstNode* normalize = find_decl(f, "Rectangle.normalize");
  EXPECT_FALSE(belongs_to_ast(loc, f, normalize->iid));
  AstLocation other_file = loc;
  other_file.file = "src/point.tj";
  EXPECT_FALSE(belongs_to_ast(other_file, f, find_calls(f, "moveAlong")[0]));
}

TEST(Ast, ParentAndEnclosing) {
  AstForest f = load_ast(project("rectangle").fixtures() / "ast.json");
  Iid call = find_calls(f, "normalize").at(0);
  const AstNode* decl = f.enclosing(call, NodeKind::FunctionDecl);
  ASSERT_NE(decl, nullptr);
  EXPECT_EQ(decl->attr_string("name"), "Rectangle.stretchLongestEdge");
  EXPECT_EQ(f.enclosing(call, NodeKind::ForStmt), nullptr);
  EXPECT_FALSE(f.parent_of(f.files()[0].root.iid).has_value());
}

TEST(Ast, SchemaErrors) {
  EXPECT_EQ(error_kind([] { forest_from_json(Json::array()); }), ErrorKind::Schema);
  EXPECT_EQ(error_kind([] { forest_from_json(Json{{"version", 2}, {"files", Json::array()}}); }), ErrorKind::Schema);
  EXPECT_EQ(error_kind([] { forest_from_json(Json{{"version", 1}}); }), ErrorKind::Schema);
  Json bad_kind = module_doc(Json::array({leaf(2)}));
  bad_kind["files"][0]["root"]["children"][0]["kind"] = "Lambda";
  EXPECT_EQ(error_kind([&] { forest_from_json(bad_kind); }), ErrorKind::Schema);
  Json missing = module_doc(Json::array({leaf(2)}));
  missing["files"][0]["root"]["children"][0].erase("attrs");
  EXPECT_EQ(error_kind([&] { forest_from_json(missing); }), ErrorKind::Schema);
  Json not_module = module_doc(Json::array());
  not_module["files"][0]["root"]["kind"] = "Block";
  EXPECT_EQ(error_kind([&] { forest_from_json(not_module); }), ErrorKind::Schema);
  EXPECT_EQ(error_kind([] { forest_from_json(module_doc(Json::array({leaf(0)}))); }), ErrorKind::Schema);
  EXPECT_EQ(error_kind([] { forest_from_json(module_doc(Json::array({leaf(2, {{3, 0}, {2, 0}})}))); }),
            ErrorKind::Schema);
}

TEST(Ast, IntegrityErrors) {
  EXPECT_EQ(error_kind([] { forest_from_json(module_doc(Json::array({leaf(2), leaf(2)}))); }), ErrorKind::Integrity);
  EXPECT_EQ(error_kind([] { forest_from_json(module_doc(Json::array({leaf(1)}))); }), ErrorKind::Integrity);
  // child span outside the module span
  EXPECT_EQ(error_kind([] { forest_from_json(module_doc(Json::array({leaf(2, {{8, 0}, {12, 0}})}))); }),
            ErrorKind::Integrity);
}

TEST(Ast, AssignIidsIsPreOrderByPath) {
  std::vector<SourceFile> files;
  files.push_back({"b.tj", surface::parse_module("function g() { return 1; }", "b.tj")});
  files.push_back({"a.tj", surface::parse_module("function f() { return 2; }", "a.tj")});
  Iid next = assign_iids(files, 10);
  AstForest f(std::move(files));
  const SourceFile& a = f.files()[0].path == "a.tj" ? f.files()[0] : f.files()[1];
  EXPECT_EQ(a.root.iid, 10);
  EXPECT_EQ(a.root.children[0].iid, 11);
  EXPECT_EQ(next, f.max_iid() + 1);
  std::vector<Iid> seen;
  std::function<void(const AstNode&)> walk = [&](const AstNode& n) {
    seen.push_back(n.iid);
    for (const auto& c : n.children) walk(c);
  };
  for (const auto& file : f.files()) walk(file.root);
  std::sort(seen.begin(), seen.end());
  for (std::size_t i = 0; i < seen.size(); ++i) EXPECT_EQ(seen[i], static_cast<Iid>(10 + i));
}

TEST(Ast, LocationJsonRoundTrip) {
  AstLocation loc{"src/x.tj", {{3, 2}, {7, 1}}};
  EXPECT_EQ(location_from_json(location_to_json(loc)), loc);
  EXPECT_EQ(error_kind([] { location_from_json(Json{{"file", "x"}}); }), ErrorKind::Schema);
}

TEST(Ast, NodeKindNames) {
  for (auto k : {NodeKind::Module, NodeKind::ForStmt, NodeKind::MapExpr})
    EXPECT_EQ(node_kind_from_string(to_string(k)), k);
  EXPECT_FALSE(node_kind_from_string("Nope").has_value());
  EXPECT_TRUE(is_statement_kind(NodeKind::AssignStmt));
  EXPECT_FALSE(is_statement_kind(NodeKind::CallExpr));
}
