#include <gtest/gtest.h>

#include <sstream>

#include "carve/io.hpp"
#include "carve/refvm.hpp"
#include "carve/trace.hpp"
#include "corpus.hpp"

using namespace carve;
using namespace carve::testing;

namespace {

refvm::RunResult run(const std::string& source, std::string* trace = nullptr) {
  AstForest f = parse_sources({{"t.tj", source}});
  std::ostringstream out;
  auto r = refvm::run_tests(f, refvm::all_tests(f), trace ? &out : nullptr);
  if (trace) *trace = out.str();
  return r;
}

void expect_pass(const std::string& body) {
  auto r = run("test \"t\" {\n" + body + "\n}\n");
  ASSERT_EQ(r.outcomes.size(), 1u);
  EXPECT_TRUE(r.outcomes[0].passed) << body << "\n" << r.outcomes[0].message;
}

void expect_fail(const std::string& body) {
  auto r = run("test \"t\" {\n" + body + "\n}\n");
  ASSERT_EQ(r.outcomes.size(), 1u);
  EXPECT_FALSE(r.outcomes[0].passed) << body;
}

}  // namespace

TEST(RefVm, Arithmetic) {
  expect_pass("assert_equal(7 / 2, 3.5);");
  expect_pass("assert_equal(4 / 2, 2.0);");
  expect_pass("assert_equal(7 % 4, 3);");
  expect_pass("assert_equal(-1 % 4, -1);");
  expect_pass("assert_equal(2 * 3 + 1, 7);");
  expect_pass("assert_equal(\"a\" + \"b\", \"ab\");");
  expect_pass("assert_equal(hypot(3, 4), 5.0);");
  expect_pass("assert_equal(min(2, 1), 1);");
  expect_pass("assert_true(1 < 2 && 2 <= 2);");
  expect_pass("assert_equal(-Infinity < 0, true);");
}

TEST(RefVm, ObjectsListsAndBuiltins) {
  expect_pass("const o = {a: 1, \"b c\": 2}; o.a += 4; assert_equal(o.a, 5); assert_equal(o[\"b c\"], 2);");
  expect_pass("const l = [1, 2]; push(l, 3); assert_equal(len(l), 3); assert_equal(l[2], 3);");
  expect_pass("assert_equal(str(3), \"3\");");
  expect_pass("let s = 0; for (let i = 0; i < 4; i += 1) { s += i; } assert_equal(s, 6);");
  expect_pass("let n = 3; while (n > 0) { n -= 1; } assert_equal(n, 0);");
  expect_pass("let x = 0; if (x == 1) { x = 5; } else if (x == 0) { x = 6; } else { x = 7; } assert_equal(x, 6);");
  expect_fail("assert_true(false);");
  expect_fail("const o = null; o.x = 1;");
  expect_fail("nope();");
}

TEST(RefVm, ClassesAndStatics) {
  auto r = run(
      "function P(x) { this.x = x; }\n"
      "function P.twice() { return this.x * 2; }\n"
      "static function P.of(x) { return new P(x); }\n"
      "test \"t\" { const p = P.of(4); assert_equal(p.twice(), 8); assert_equal(p.x, 4); }\n"
      "test \"shadow\" { const P = {of: 1}; assert_equal(P.of, 1); }\n");
  ASSERT_EQ(r.outcomes.size(), 2u);
  EXPECT_TRUE(r.all_passed()) << r.outcomes[0].message << r.outcomes[1].message;
}

TEST(RefVm, TraceIsBalancedWhenATestThrows) {
  std::string text;
  auto r = run(
      "function boom(x) { if (x > 0) { return nope(x); } return 1; }\n"
      "test \"fails\" { boom(1); }\n"
      "test \"passes\" { assert_equal(boom(0), 1); }\n",
      &text);
  ASSERT_EQ(r.outcomes.size(), 2u);
  EXPECT_FALSE(r.outcomes[0].passed);
  EXPECT_TRUE(r.outcomes[1].passed);
  std::istringstream in(text);
  std::vector<TraceEvent> events;
  ASSERT_NO_THROW(events = parse_trace(in));
  std::size_t enters = 0, exits = 0;
  for (const auto& e : events) {
    enters += e.ev == EventKind::FunctionEnter;
    exits += e.ev == EventKind::FunctionExit;
  }
  EXPECT_EQ(enters, exits);
  EXPECT_GE(enters, 4u);
}

TEST(RefVm, RefIdsAreNeverReused) {
  std::string text;
  run("function P() { this.a = 1; }\ntest \"a\" { const p = new P(); }\ntest \"b\" { const q = new P(); }\n", &text);
  std::istringstream in(text);
  std::set<RefId> receivers;
  std::size_t enters = 0;
  for (const auto& e : parse_trace(in))
    if (e.ev == EventKind::FunctionEnter && e.receiver && e.receiver->is_ref()) {
      receivers.insert(e.receiver->ref_id());
      ++enters;
    }
  EXPECT_EQ(receivers.size(), enters);
  EXPECT_EQ(receivers.size(), 2u);
}

TEST(RefVm, TestsRunWithTheirDeclarationAsInvocation) {
  std::string text;
  AstForest f = parse_sources({{"t.tj", "test \"a\" { let x = 1; }\n"}});
  std::ostringstream out;
  refvm::run_tests(f, refvm::all_tests(f), &out);
  std::istringstream in(out.str());
  auto events = parse_trace(in);
  ASSERT_GE(events.size(), 2u);
  Iid t = refvm::all_tests(f)[0];
  EXPECT_EQ(events[0].ev, EventKind::InvokeFunPre);
  EXPECT_EQ(events[0].iid, t);
  EXPECT_EQ(events[1].ev, EventKind::FunctionEnter);
  EXPECT_EQ(events[1].iid, t);
}

TEST(RefVm, CorpusSuitesPass) {
  for (const auto& p : corpus()) {
    AstForest f = refvm::dump_ast(p.prod, p.test);
    auto r = refvm::run_tests(f, refvm::all_tests(f));
    EXPECT_TRUE(r.all_passed()) << p.name;
    EXPECT_FALSE(r.outcomes.empty());
  }
}

TEST(RefVm, DumpMatchesFixtureSnapshot) {
  for (const auto& p : corpus())
    EXPECT_EQ(forest_to_json(refvm::dump_ast(p.prod, p.test)), read_json(p.fixtures() / "ast.json")) << p.name;
}

TEST(RefVm, EmptyProject) {
  ScratchDir dir("refvm-empty");
  fs::create_directories(dir / "src");
  fs::create_directories(dir / "test");
  AstForest f = refvm::dump_ast(dir / "src", dir / "test");
  EXPECT_TRUE(f.files().empty());
  EXPECT_TRUE(refvm::all_tests(f).empty());
  EXPECT_EQ(error_kind([&] { refvm::dump_ast(dir / "missing", dir / "test"); }), ErrorKind::Io);
}

TEST(RefVm, RenderEmptyPlanDir) {
  ScratchDir dir("refvm-render");
  EXPECT_TRUE(refvm::render_tests(dir / "plans", dir / "out").empty());
  EXPECT_FALSE(fs::exists(dir / "out/anything.tj"));
}

TEST(RefVm, RenderMatchesCoreRendering) {
  Project p = project("bank");
  ScratchDir dir("refvm-render-bank");
  auto written = refvm::render_tests(p.expected() / "plans", dir / "out");
  EXPECT_EQ(snapshot_tree(dir / "out"), snapshot_tree(p.expected() / "generated"));
  EXPECT_EQ(written.size(), 4u);
}
