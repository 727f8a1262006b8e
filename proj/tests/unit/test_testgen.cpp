#include <gtest/gtest.h>

#include "carve/filter.hpp"
#include "carve/io.hpp"
#include "carve/surface.hpp"
#include "carve/testgen.hpp"
#include "corpus.hpp"

using namespace carve;
using namespace carve::testing;

namespace {

struct Generated {
  Loaded l;
  Analysis a;
  std::vector<FlowSlice> slices;
  GenerationResult gen;

  const TestPlan& plan(const std::string& name) const {
    for (const auto& p : gen.plans)
      if (p.name == name) return p;
    throw std::runtime_error("no plan " + name);
  }
};

Generated generate(const std::string& name) {
  Generated g{load_fixture(project(name)), {}, {}, {}};
  FilterResult r = filter_tests(g.l.trace, g.l.forest, g.l.sites);
  g.a = build_seed_paths(g.l.trace, g.l.forest, g.l.sites, std::set<Iid>(r.tests.begin(), r.tests.end()));
  g.slices = compute_all_slices(g.a);
  g.gen = generate_all(g.a, g.slices, g.l.sites, g.l.forest);
  return g;
}

std::string asserts_of(const TestPlan& p) {
  std::string out;
  for (const auto& a : p.asserts) out += surface::render_expression(a.target) + "=" + a.expected.literal_text() + ";";
  return out;
}

}  // namespace

TEST(Testgen, LiteralNode) {
  AstNode f = literal_node(Value(-2.0));
  EXPECT_EQ(f.kind, NodeKind::Literal);
  EXPECT_EQ(f.iid, 0);
  EXPECT_EQ(f.attr_string("type"), "float");
  EXPECT_EQ(surface::render_expression(f), "-2.0");
  EXPECT_EQ(surface::render_expression(literal_node(Value("a b"))), "\"a b\"");
  EXPECT_EQ(surface::render_expression(literal_node(Value(Null{}))), "null");
  EXPECT_EQ(literal_node(Value(7)).attrs["value"], 7);
  EXPECT_EQ(error_kind([] { literal_node(Value(Ref{1})); }), ErrorKind::Usage);
}

TEST(Testgen, ResolveIdForRef) {
  SeedPath p;
  p.statements.resize(4);
  p.statements[0].bound = {{"r", 5}};
  p.statements[2].bound = {{"pA", 6}, {"alias", 5}};
  EXPECT_EQ(resolve_id_for_ref(5, p, 3), (std::pair<std::string, std::size_t>{"alias", 2}));
  EXPECT_EQ(resolve_id_for_ref(5, p, 1), (std::pair<std::string, std::size_t>{"r", 0}));
  EXPECT_EQ(resolve_id_for_ref(6, p, 2), (std::pair<std::string, std::size_t>{"pA", 2}));
  EXPECT_EQ(error_kind([&] { resolve_id_for_ref(6, p, 1); }), ErrorKind::Resolution);
  EXPECT_EQ(error_kind([&] { resolve_id_for_ref(9, p, 3); }), ErrorKind::Resolution);
  EXPECT_EQ(error_kind([] { resolve_id_for_ref(1, SeedPath{}, 0); }), ErrorKind::Resolution);
}

TEST(Testgen, RectanglePlanNames) {
  Generated g = generate("rectangle");
  std::vector<std::string> names;
  for (const auto& p : g.gen.plans) names.push_back(p.name);
  EXPECT_EQ(names, (std::vector<std::string>{"distanceFrom-T1", "distanceFrom-T2", "distanceFrom-T3", "distanceFrom-T4",
                                             "normalize-T1", "moveAlong-T1", "moveAlong-T2"}));
  EXPECT_EQ(g.gen.candidates, 7u);
  EXPECT_EQ(g.gen.duplicates, 0u);
  EXPECT_TRUE(g.gen.failures.empty());
}

TEST(Testgen, MoveAlongArrangeActAssert) {
  Generated g = generate("rectangle");
  const TestPlan& p = g.plan("moveAlong-T1");
  EXPECT_EQ(render_plan_body(p),
            "  let p0 = new Point(0, 0);\n"
            "  let p1 = new Point(0, 4);\n"
            "  let p2 = new Point(3, 4);\n"
            "  let p3 = new Point(3, 0);\n"
            "  let r = new Rectangle(p0, p1, p2, p3);\n"
            "  let edgeIndex = 0;\n"
            "  const pA = r.points[edgeIndex];\n"
            "  const normal = Rectangle.normalize(-4, 0);\n"
            "  pA.moveAlong(normal, 2);\n"
            "  assert_equal(pA.x, -2.0);\n"
            "  assert_equal(pA.y, 0.0);\n");
  EXPECT_EQ(p.dependency, "Point.moveAlong");
  EXPECT_EQ(p.method, "moveAlong");
  EXPECT_EQ(p.imports, (std::vector<std::string>{"src/point.tj", "src/rectangle.tj"}));
  EXPECT_EQ(p.provenance.test_iid, g.l.sites.test_iids[0]);
  EXPECT_EQ(p.provenance.site_iid, g.l.sites.deps[2].sites[0]);
  EXPECT_EQ(g.plan("moveAlong-T2").provenance.site_iid, g.l.sites.deps[2].sites[1]);
}

TEST(Testgen, DistanceFromAssertsResult) {
  Generated g = generate("rectangle");
  EXPECT_EQ(asserts_of(g.plan("distanceFrom-T1")), "actualResult=4.0;");
  EXPECT_EQ(asserts_of(g.plan("distanceFrom-T2")), "actualResult=3.0;");
  std::string body = render_plan_body(g.plan("distanceFrom-T3"));
  EXPECT_NE(body.find("  let i = 2;\n"), std::string::npos) << body;
  EXPECT_NE(body.find("const actualResult = a.distanceFrom(b);"), std::string::npos) << body;
  EXPECT_EQ(body.find("maxLen"), std::string::npos) << body;
}

TEST(Testgen, NormalizeResultFields) {
  Generated g = generate("rectangle");
  EXPECT_EQ(asserts_of(g.plan("normalize-T1")), "actualResult.x=-1.0;actualResult.y=0.0;");
  EXPECT_EQ(surface::render_statement(g.plan("normalize-T1").act),
            "const actualResult = Rectangle.normalize(-4, 0);\n");
}

TEST(Testgen, PathWithoutDependenciesYieldsNothing) {
  Analysis a;
  a.contexts.resize(1);
  a.paths.push_back(SeedPath{});
  a.paths[0].statements.resize(3);
  AstForest f;
  CallSiteSet s;
  GenerationResult r = generate_all(a, compute_all_slices(a), s, f);
  EXPECT_TRUE(r.plans.empty());
  EXPECT_EQ(r.candidates, 0u);
}

TEST(Testgen, DuplicatesAreDropped) {
  Generated g = generate("histogram");
  EXPECT_EQ(g.gen.plans.size(), 5u);
  EXPECT_EQ(g.gen.duplicates, 2u);
  EXPECT_EQ(g.gen.candidates, 7u);
  std::set<std::string> bodies;
  for (const auto& p : g.gen.plans) EXPECT_TRUE(bodies.insert(render_plan_body(p)).second) << p.name;
}

TEST(Testgen, NestedListAndQuotedAssertPaths) {
  Generated g = generate("cart");
  EXPECT_EQ(asserts_of(g.plan("summary-T1")),
            "actualResult.total=8.0;actualResult[\"line count\"]=2;actualResult.first.sku=\"pen\";"
            "actualResult.first.qty=3;actualResult.tags[0]=\"sale\";actualResult.tags[1]=false;");
  // argument mutation is asserted on the argument expression
  EXPECT_EQ(asserts_of(g.plan("discount-T1")), "cart.lines[i].price=1.0;cart.lines[i].discounted=true;");
}

TEST(Testgen, HelperImportsComeFromTheirFile) {
  Generated g = generate("bank");
  bool found = false;
  for (const auto& p : g.gen.plans) {
    std::string body = render_plan_body(p);
    if (body.find("makeBank()") == std::string::npos) continue;
    found = true;
    EXPECT_NE(std::find(p.imports.begin(), p.imports.end(), "test/transfer_test.tj"), p.imports.end()) << p.name;
  }
  EXPECT_TRUE(found);
}

TEST(Testgen, PlanJsonRoundTrip) {
  for (const char* name : {"rectangle", "cart", "bank"}) {
    Generated g = generate(name);
    for (const auto& p : g.gen.plans) {
      Json j = plan_to_json(p);
      TestPlan back = plan_from_json(j);
      EXPECT_EQ(plan_to_json(back), j);
      EXPECT_EQ(render_plan(back), render_plan(p));
    }
  }
  EXPECT_ANY_THROW(plan_from_json(Json::object()));
}

TEST(Testgen, RenderFormat) {
  Generated g = generate("rectangle");
  const TestPlan& p = g.plan("moveAlong-T1");
  std::string one = render_plan(p);
  EXPECT_TRUE(one.starts_with("test \"moveAlong-T1\" {\n"));
  EXPECT_TRUE(one.ends_with("}\n"));
  std::vector<const TestPlan*> both{&g.plan("moveAlong-T1"), &g.plan("moveAlong-T2")};
  std::string file = render_plan_file(both);
  EXPECT_EQ(file, read_text(project("rectangle").expected() / "generated/moveAlong.carved_test.tj"));
  EXPECT_EQ(one, read_text(project("rectangle").expected() / "canonical/moveAlong-T1.tj"));
}

TEST(Testgen, SerialEqualsParallel) {
  for (const char* name : {"rectangle", "bank", "cart", "histogram", "textkit"}) {
    Generated g = generate(name);
    GenerationResult serial = generate_all_serial(g.a, g.slices, g.l.sites, g.l.forest);
    ASSERT_EQ(serial.plans.size(), g.gen.plans.size()) << name;
    for (std::size_t i = 0; i < serial.plans.size(); ++i)
      EXPECT_EQ(plan_to_json(serial.plans[i]), plan_to_json(g.gen.plans[i])) << name;
    EXPECT_EQ(serial.duplicates, g.gen.duplicates);
  }
}
