#pragma once

// Reference interpreter for the surface language. It executes test cases
// straight from an interchange AST and can emit the instrumentation trace,
// which makes it a complete tracing harness for the bundled corpus.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "carve/ast.hpp"

namespace carve::refvm {

struct TestOutcome {
  Iid test = 0;
  std::string name;
  bool passed = true;
  std::string message;
};

struct RunResult {
  std::vector<TestOutcome> outcomes;
  bool all_passed() const;
};

// isTest declarations in iid order.
std::vector<Iid> all_tests(const AstForest& forest);
// Tests of the merged module only (root attrs.merged).
std::vector<Iid> merged_tests(const AstForest& forest);

// Runs the tests in order in one process-like session (reference ids are
// never reused). With `trace` set, writes a header and one event per line.
RunResult run_tests(const AstForest& forest, const std::vector<Iid>& tests, std::ostream* trace = nullptr,
                    const std::string& ast_dump = "");

// Harness verbs.
AstForest dump_ast(const std::filesystem::path& prod_dir, const std::filesystem::path& test_dir);
RunResult trace_suite(const std::filesystem::path& ast, const std::filesystem::path& trace_out, bool merged_only);
// Renders every plan document under plan_dir into one test file per
// dependency. Returns the files written.
std::vector<std::filesystem::path> render_tests(const std::filesystem::path& plan_dir,
                                                const std::filesystem::path& out_dir);

// Entry point of the carve-ref-harness executable.
int harness_main(int argc, char** argv);

}  // namespace carve::refvm
