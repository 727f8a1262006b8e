#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sys/wait.h>

#include "carve/io.hpp"
#include "carve/trace.hpp"
#include "corpus.hpp"

using namespace carve;
using namespace carve::testing;

namespace {

const char* const kOutputs[] = {"plans", "canonical", "generated", "report.json", "report.txt"};

std::vector<std::pair<std::string, std::string>> outputs(const fs::path& dir) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const char* o : kOutputs) {
    fs::path p = dir / o;
    if (fs::is_directory(p)) {
      for (auto& [rel, bytes] : snapshot_tree(p)) out.emplace_back(std::string(o) + "/" + rel, bytes);
    } else if (fs::exists(p)) {
      out.emplace_back(o, read_text(p));
    }
  }
  return out;
}

struct Shell {
  int status;
  std::string output;
};

Shell sh(const std::string& cmd, const fs::path& log) {
  int rc = std::system((cmd + " > " + shell_quote(log.string()) + " 2>&1").c_str());
  return {WIFEXITED(rc) ? WEXITSTATUS(rc) : -1, fs::exists(log) ? read_text(log) : ""};
}

std::string carve_bin() { return shell_quote((tools_dir() / "carve").string()); }

std::string fixture_args(const Project& p, const fs::path& out, const std::string& component = "") {
  std::string a = " --prod-dir " + shell_quote(p.prod.string()) + " --test-dir " + shell_quote(p.test.string()) +
                  " --component " + shell_quote(component.empty() ? p.component : component) + " --out " + shell_quote(out.string()) + " --ast " +
                  shell_quote((p.fixtures() / "ast.json").string()) + " --from-trace " +
                  shell_quote((p.fixtures() / "trace.jsonl").string());
  if (!p.component_file.empty()) a += " --component-file " + shell_quote((p.dir / p.component_file).string());
  if (p.has_merged_trace()) a += " --merged-trace " + shell_quote((p.fixtures() / "merged_trace.jsonl").string());
  return a;
}

Shell check_suite(const fs::path& prod, const fs::path& test, const fs::path& log) {
  return sh(harness_command() + " check " + shell_quote(prod.string()) + " " + shell_quote(test.string()), log);
}

}  // namespace

TEST(EndToEnd, FixtureRunsReproduceGoldenOutputs) {
  for (const auto& p : corpus()) {
    ScratchDir out("e2e-golden");
    run_pipeline(fixture_config(p, out.path()));
    auto got = outputs(out.path());
    auto want = outputs(p.expected());
    ASSERT_FALSE(want.empty()) << p.name;
    EXPECT_EQ(got, want) << p.name;
  }
}

TEST(EndToEnd, HarnessRunsMatchFixtures) {
  for (const auto& p : corpus()) {
    ScratchDir out("e2e-harness");
    RunConfig c = harness_config(p, out.path());
    c.keep_intermediates = true;
    RunReport r = run_pipeline(c);
    EXPECT_EQ(read_text(out / "intermediates/ast.json"), read_text(p.fixtures() / "ast.json")) << p.name;
    EXPECT_EQ(read_text(out / "intermediates/trace.jsonl"), read_text(p.fixtures() / "trace.jsonl")) << p.name;
    if (p.has_merged_trace()) {
      EXPECT_EQ(read_text(out / "intermediates/merged_trace.jsonl"), read_text(p.fixtures() / "merged_trace.jsonl"))
          << p.name;
    }
    EXPECT_EQ(outputs(out.path()), outputs(p.expected())) << p.name;
    EXPECT_GT(r.timings_ms.count("trace"), 0u);
  }
}

TEST(EndToEnd, GeneratedSuitesPass) {
  for (const auto& p : corpus()) {
    if (!fs::exists(p.expected() / "generated")) continue;
    ScratchDir stage("e2e-green");
    auto [prod, test] = stage_generated(p, p.expected() / "generated", stage.path());
    Shell s = check_suite(prod, test, stage / "check.log");
    EXPECT_EQ(s.status, 0) << p.name << "\n" << s.output;
    EXPECT_NE(s.output.find(" 0 failed"), std::string::npos) << s.output;
    EXPECT_EQ(s.output.find("FAIL"), std::string::npos) << s.output;
  }
}

TEST(EndToEnd, GeneratedTestsKillAMutantTheIntegrationTestMisses) {
  Project p = project("rectangle");
  ScratchDir stage("e2e-mutant");
  auto [prod, test] = stage_generated(p, p.expected() / "generated", stage.path());
  fs::path point = prod / "point.tj";
  std::string src = read_text(point);
  const std::string from = "this.x += direction.x * distance;";
  ASSERT_NE(src.find(from), std::string::npos);
  write_text(point, src.replace(src.find(from), from.size(), "this.x -= direction.x * distance;"));

  // the original suite alone
  fs::path carved = test / "carved";
  fs::path aside = stage / "aside";
  fs::rename(carved, aside);
  Shell original = check_suite(prod, test, stage / "original.log");
  EXPECT_EQ(original.status, 0) << original.output;

  fs::rename(aside, carved);
  Shell augmented = check_suite(prod, test, stage / "augmented.log");
  EXPECT_EQ(augmented.status, 1) << augmented.output;
  EXPECT_NE(augmented.output.find("FAIL moveAlong-T1"), std::string::npos) << augmented.output;
  EXPECT_NE(augmented.output.find("ok   distanceFrom-T1"), std::string::npos) << augmented.output;
}

TEST(Cli, ExitCodes) {
  ScratchDir dir("cli");
  Project rect = project("rectangle");
  Shell ok = sh(carve_bin() + " run" + fixture_args(rect, dir / "rect"), dir / "ok.log");
  EXPECT_EQ(ok.status, 0) << ok.output;
  EXPECT_NE(ok.output.find("Augmentation ratio (%)  700.0%"), std::string::npos) << ok.output;
  EXPECT_EQ(read_text(dir / "rect/generated/moveAlong.carved_test.tj"),
            read_text(rect.expected() / "generated/moveAlong.carved_test.tj"));

  Shell none = sh(carve_bin() + " run" + fixture_args(project("geometry"), dir / "geo"), dir / "none.log");
  EXPECT_EQ(none.status, 2) << none.output;

  Shell missing = sh(carve_bin() + " run" + fixture_args(rect, dir / "bad", "Rectangle.nope"),
                     dir / "missing.log");
  EXPECT_EQ(missing.status, 3) << missing.output;
  EXPECT_NE(missing.output.find("resolve"), std::string::npos) << missing.output;

  Shell usage = sh(carve_bin() + " run --prod-dir x", dir / "usage.log");
  EXPECT_EQ(usage.status, 3);
  Shell no_trace = sh(carve_bin() + " run --prod-dir " + shell_quote(rect.prod.string()) + " --test-dir " +
                          shell_quote(rect.test.string()) + " --component Rectangle.stretchLongestEdge",
                      dir / "notrace.log");
  EXPECT_EQ(no_trace.status, 3);
  Shell no_verb = sh(carve_bin(), dir / "noverb.log");
  EXPECT_EQ(no_verb.status, 3);
  Shell help = sh(carve_bin() + " --help", dir / "help.log");
  EXPECT_EQ(help.status, 0);
  for (const char* verb : {"resolve", "filter", "analyze", "generate", "run", "report"})
    EXPECT_NE(help.output.find(verb), std::string::npos) << verb;
}

TEST(Cli, StepVerbsAndReport) {
  ScratchDir dir("cli-steps");
  Project rect = project("rectangle");
  for (const char* verb : {"resolve", "filter", "analyze"}) {
    Shell s = sh(carve_bin() + " " + verb + fixture_args(rect, dir / verb), dir / (std::string(verb) + ".log"));
    EXPECT_EQ(s.status, 0) << verb << s.output;
    EXPECT_TRUE(fs::exists(dir / verb / "intermediates/resolution.json"));
    EXPECT_FALSE(fs::exists(dir / verb / "plans"));
  }
  Shell gen = sh(carve_bin() + " generate" + fixture_args(rect, dir / "gen"), dir / "gen.log");
  EXPECT_EQ(gen.status, 0);
  EXPECT_TRUE(fs::exists(dir / "gen/plans/moveAlong-T1.json"));

  Shell report = sh(carve_bin() + " report --out " + shell_quote((dir / "gen").string()), dir / "report.log");
  EXPECT_EQ(report.status, 0);
  EXPECT_EQ(report.output, read_text(rect.expected() / "report.txt"));
  Shell absent = sh(carve_bin() + " report --out " + shell_quote((dir / "nothing").string()), dir / "absent.log");
  EXPECT_EQ(absent.status, 3);
}

TEST(Cli, HarnessDrivenRun) {
  ScratchDir dir("cli-harness");
  Project p = project("bank");
  Shell s = sh(carve_bin() + " run --prod-dir " + shell_quote(p.prod.string()) + " --test-dir " +
                   shell_quote(p.test.string()) + " --component Bank.transfer --harness-cmd " +
                   shell_quote(harness_command()) + " --out " + shell_quote((dir / "out").string()),
               dir / "run.log");
  EXPECT_EQ(s.status, 0) << s.output;
  EXPECT_EQ(outputs(dir / "out"), outputs(p.expected()));
  EXPECT_FALSE(fs::exists(dir / "out/intermediates"));
  Shell broken = sh(carve_bin() + " run --prod-dir " + shell_quote(p.prod.string()) + " --test-dir " +
                        shell_quote(p.test.string()) + " --component Bank.transfer --harness-cmd false --out " +
                        shell_quote((dir / "out2").string()),
                    dir / "broken.log");
  EXPECT_EQ(broken.status, 3);
  EXPECT_NE(broken.output.find("dump-ast"), std::string::npos) << broken.output;
}

TEST(HarnessContract, Verbs) {
  ScratchDir dir("harness");
  Project p = project("rectangle");
  EXPECT_EQ(sh(harness_command(), dir / "a.log").status, 64);
  EXPECT_EQ(sh(harness_command() + " teleport", dir / "b.log").status, 64);
  EXPECT_EQ(sh(harness_command() + " trace onlyone", dir / "c.log").status, 64);
  EXPECT_EQ(sh(harness_command() + " dump-ast /nonexistent /nonexistent " + shell_quote((dir / "x.json").string()),
               dir / "d.log")
                .status,
            70);

  fs::path ast = dir / "ast.json";
  Shell dump = sh(harness_command() + " dump-ast " + shell_quote(p.prod.string()) + " " +
                      shell_quote(p.test.string()) + " " + shell_quote(ast.string()),
                  dir / "dump.log");
  ASSERT_EQ(dump.status, 0) << dump.output;
  EXPECT_EQ(read_json(ast), read_json(p.fixtures() / "ast.json"));

  fs::path trace = dir / "trace.jsonl";
  Shell tr = sh(harness_command() + " trace " + shell_quote(ast.string()) + " " + shell_quote(trace.string()),
                dir / "trace.log");
  ASSERT_EQ(tr.status, 0) << tr.output;
  EXPECT_EQ(read_text(trace), read_text(p.fixtures() / "trace.jsonl"));
  std::ifstream in(trace);
  TraceReader reader(in);
  while (reader.next()) {
  }
  ASSERT_TRUE(reader.header());
  EXPECT_EQ(reader.header()->ast_dump, "ast.json");

  fs::path rendered = dir / "rendered";
  Shell render = sh(harness_command() + " render " + shell_quote((p.expected() / "plans").string()) + " " +
                        shell_quote(rendered.string()),
                    dir / "render.log");
  ASSERT_EQ(render.status, 0) << render.output;
  EXPECT_EQ(snapshot_tree(rendered), snapshot_tree(p.expected() / "generated"));
}
