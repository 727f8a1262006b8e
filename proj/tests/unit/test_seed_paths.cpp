#include <gtest/gtest.h>

#include "carve/filter.hpp"
#include "carve/seed_paths.hpp"
#include "corpus.hpp"

using namespace carve;
using namespace carve::testing;

namespace {

struct Built {
  Loaded l;
  Analysis a;
};

Built build(const std::string& name) {
  Built b{load_fixture(project(name)), {}};
  FilterResult r = filter_tests(b.l.trace, b.l.forest, b.l.sites);
  b.a = build_seed_paths(b.l.trace, b.l.forest, b.l.sites, std::set<Iid>(r.tests.begin(), r.tests.end()));
  return b;
}

std::vector<std::size_t> occurrences(const SeedPath& p, Iid iid) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < p.statements.size(); ++i)
    if (p.statements[i].iid == iid) out.push_back(i);
  return out;
}

Iid statement(const AstForest& f, const std::string& text) {
  auto found = find_statements(f, text);
  EXPECT_EQ(found.size(), 1u) << text;
  return found.empty() ? 0 : found[0];
}

const ExecutionContext* dep_of(const Analysis& a, const StatementNode& n) {
  for (ContextId c : n.spawned)
    if (a.context(c).type == ContextType::Dep) return &a.context(c);
  return nullptr;
}

}  // namespace

TEST(SeedPaths, OnePathPerFilteredTest) {
  Built r = build("rectangle");
  ASSERT_EQ(r.a.paths.size(), 1u);
  EXPECT_EQ(r.a.paths[0].test_iid, r.l.sites.test_iids[0]);
  EXPECT_EQ(r.a.paths[0].test_loc, r.l.sites.test_locs[0]);
  Built b = build("bank");
  EXPECT_EQ(b.a.paths.size(), 3u);
}

TEST(SeedPaths, LoopBodyStatementsRepeat) {
  Built r = build("rectangle");
  const SeedPath& p = r.a.paths[0];
  EXPECT_EQ(occurrences(p, statement(r.l.forest, "const a = this.points[i];")).size(), 4u);
  EXPECT_EQ(occurrences(p, statement(r.l.forest, "const len = a.distanceFrom(b);")).size(), 4u);
  EXPECT_EQ(occurrences(p, statement(r.l.forest, "pA.moveAlong(normal, amount);")).size(), 1u);
  // loop variable values per iteration
  auto header = occurrences(p, statement(r.l.forest, "const a = this.points[i];"));
  std::vector<Value> seen;
  for (std::size_t k : header)
    for (std::size_t j = k; j-- > 0;)
      if (const Value* v = p.statements[j].defined_value("i")) {
        seen.push_back(*v);
        break;
      }
  EXPECT_EQ(seen, (std::vector<Value>{Value(0), Value(1), Value(2), Value(3)}));
}

TEST(SeedPaths, NoDependencyStatementsStored) {
  Built r = build("rectangle");
  const AstNode* move = find_decl(r.l.forest, "Point.moveAlong");
  const AstNode* point = find_decl(r.l.forest, "Point");
  for (const auto& n : r.a.paths[0].statements) {
    EXPECT_FALSE(belongs_to_ast(iid_to_location(r.l.forest, move->iid), r.l.forest, n.iid));
    EXPECT_FALSE(belongs_to_ast(iid_to_location(r.l.forest, point->iid), r.l.forest, n.iid));
  }
}

TEST(SeedPaths, MoveAlongContext) {
  Built r = build("rectangle");
  const SeedPath& p = r.a.paths[0];
  auto k = occurrences(p, statement(r.l.forest, "pA.moveAlong(normal, amount);"));
  ASSERT_EQ(k.size(), 1u);
  const StatementNode& n = p.statements[k[0]];
  const ExecutionContext* ctx = dep_of(r.a, n);
  ASSERT_NE(ctx, nullptr);
  EXPECT_EQ(ctx->invocation_iid, r.l.sites.deps[2].sites[0]);
  ASSERT_TRUE(ctx->receiver && ctx->receiver->is_ref());
  ASSERT_EQ(ctx->args.size(), 2u);
  EXPECT_TRUE(ctx->args[0].is_ref());
  EXPECT_EQ(ctx->args[1], Value(2));

  // receiver is pA, bound two statements earlier
  auto pa = occurrences(p, statement(r.l.forest, "const pA = this.points[edgeIndex];"));
  ASSERT_EQ(pa.size(), 1u);
  EXPECT_EQ(p.statements[pa[0]].bound_ref("pA"), ctx->receiver->ref_id());
  auto normal = occurrences(p, statement(r.l.forest, "const normal = Rectangle.normalize(-dy, dx);"));
  ASSERT_EQ(normal.size(), 1u);
  EXPECT_EQ(p.statements[normal[0]].bound_ref("normal"), ctx->args[0].ref_id());
  // the normalize context returned that same object
  const ExecutionContext* nctx = dep_of(r.a, p.statements[normal[0]]);
  ASSERT_NE(nctx, nullptr);
  ASSERT_TRUE(nctx->result);
  EXPECT_EQ(*nctx->result, ctx->args[0]);
  EXPECT_TRUE(std::binary_search(p.statements[normal[0]].mutated.begin(), p.statements[normal[0]].mutated.end(),
                                 ctx->args[0].ref_id()));

  // exit props of the receiver
  const PropList& props = ctx->exit_props.at(ctx->receiver->ref_id());
  ASSERT_EQ(props.size(), 2u);
  EXPECT_EQ(props[0].first, "x");
  EXPECT_EQ(props[0].second, Value(-2.0));
  EXPECT_EQ(props[1].first, "y");
  EXPECT_EQ(props[1].second, Value(0.0));
  EXPECT_TRUE(std::binary_search(n.mutated.begin(), n.mutated.end(), ctx->receiver->ref_id()));
}

TEST(SeedPaths, SecondMoveAlongMovesPB) {
  Built r = build("rectangle");
  const SeedPath& p = r.a.paths[0];
  auto k = occurrences(p, statement(r.l.forest, "pB.moveAlong(normal, amount);"));
  ASSERT_EQ(k.size(), 1u);
  const ExecutionContext* ctx = dep_of(r.a, p.statements[k[0]]);
  ASSERT_NE(ctx, nullptr);
  const PropList& props = ctx->exit_props.at(ctx->receiver->ref_id());
  ASSERT_EQ(props.size(), 2u);
  EXPECT_EQ(props[0].second, Value(-2.0));
  EXPECT_EQ(props[1].second, Value(4.0));
}

TEST(SeedPaths, UsedAndMutatedAreSortedUnique) {
  for (const char* name : {"rectangle", "bank", "cart", "histogram", "textkit"}) {
    Built b = build(name);
    for (const auto& p : b.a.paths)
      for (const auto& n : p.statements) {
        EXPECT_TRUE(std::adjacent_find(n.used.begin(), n.used.end(), std::greater_equal<>()) == n.used.end());
        EXPECT_TRUE(std::adjacent_find(n.mutated.begin(), n.mutated.end(), std::greater_equal<>()) ==
                    n.mutated.end());
      }
  }
}

TEST(SeedPaths, EnclosingStatementsSpanTheirBody) {
  Built r = build("rectangle");
  const SeedPath& p = r.a.paths[0];
  auto call = occurrences(p, statement(r.l.forest, "const result = r.stretchLongestEdge(2);"));
  ASSERT_EQ(call.size(), 1u);
  const StatementNode& n = p.statements[call[0]];
  EXPECT_GT(n.last, call[0]);
  auto move = occurrences(p, statement(r.l.forest, "pB.moveAlong(normal, amount);"));
  EXPECT_LE(move[0], n.last);
  for (std::size_t i = 0; i < p.statements.size(); ++i) EXPECT_GE(p.statements[i].last, i);
}

TEST(SeedPaths, AnalysisJsonRoundTrip) {
  for (const char* name : {"rectangle", "bank"}) {
    Built b = build(name);
    Json j = analysis_to_json(b.a);
    Analysis back = analysis_from_json(j);
    EXPECT_EQ(analysis_to_json(back), j) << name;
    ASSERT_EQ(back.paths.size(), b.a.paths.size());
    EXPECT_EQ(back.paths[0].statements.size(), b.a.paths[0].statements.size());
    EXPECT_EQ(back.paths[0].statements.back().last, b.a.paths[0].statements.back().last);
  }
}

TEST(SeedPaths, OnlyTestsRestrictsPaths) {
  Loaded l = load_fixture(project("bank"));
  Analysis none = build_seed_paths(l.trace, l.forest, l.sites, std::set<Iid>{});
  EXPECT_TRUE(none.paths.empty());
  Analysis all = build_seed_paths(l.trace, l.forest, l.sites);
  // the two tests that never reach a dependency through the target are discarded
  EXPECT_EQ(all.paths.size(), 3u);
  EXPECT_EQ(all.warnings.size(), 2u);
}
