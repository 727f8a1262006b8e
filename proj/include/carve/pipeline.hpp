#pragma once

// End-to-end orchestration: resolve, filter, merge, analyze, slice and
// generate, with the tracing harness driven as an external command.
//
// Harness contract (positional arguments, files only):
//   <harness> dump-ast     <prod-dir> <test-dir> <ast-out>
//   <harness> trace        <ast> <trace-out>
//   <harness> trace-merged <merged-ast> <trace-out> <filter-report>
//   <harness> render       <plan-dir> <out-dir>
// Snapshot paths in the AST are relative to the nearest common ancestor of
// the production and test directories.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "carve/callsites.hpp"
#include "carve/error.hpp"
#include "carve/filter.hpp"
#include "carve/metrics.hpp"
#include "carve/object_flow.hpp"
#include "carve/seed_paths.hpp"
#include "carve/testgen.hpp"

namespace carve {

namespace fs = std::filesystem;

enum ExitCode : int { kExitOk = 0, kExitNothingToAugment = 2, kExitPipelineError = 3 };

// An Error raised inside a named pipeline step.
class StepError : public std::runtime_error {
 public:
  StepError(std::string step, const Error& cause)
      : std::runtime_error("step '" + step + "': " + cause.what()), step_(std::move(step)), kind_(cause.kind()) {}
  const std::string& step() const noexcept { return step_; }
  ErrorKind kind() const noexcept { return kind_; }

 private:
  std::string step_;
  ErrorKind kind_;
};

struct RunConfig {
  fs::path prod_dir;
  fs::path test_dir;
  std::string component;
  std::string component_file;
  fs::path out_dir = "carve-out";
  std::string harness_cmd;
  std::optional<fs::path> ast;           // pre-dumped snapshot
  std::optional<fs::path> from_trace;    // recorded full-suite trace
  std::optional<fs::path> merged_trace;  // recorded merged-module trace
  bool keep_intermediates = false;
  // "resolve", "filter" or "analyze": stop after that step and keep the
  // intermediates written so far. "generate" writes plans and the core
  // rendering but skips the harness render. Empty runs everything.
  std::string stop_after;
};

fs::path snapshot_base(const fs::path& prod_dir, const fs::path& test_dir);
// Path of `p` relative to `base`, forward slashes; "." for base itself.
std::string snapshot_relative(const fs::path& p, const fs::path& base);

std::string shell_quote(const std::string& arg);
// Runs `<harness_cmd> args...`; throws Subprocess with the captured output
// when the command fails.
void run_harness(const std::string& harness_cmd, const std::vector<std::string>& args, const fs::path& log);

TargetSpec target_spec(const RunConfig& config);

// Loads --ast, or asks the harness to dump one into `work`.
AstForest obtain_ast(const RunConfig& config, const fs::path& work);

struct AnalysisOutput {
  Analysis analysis;
  std::vector<FlowSlice> slices;
};

// Seed paths and slices. Uses the merged-module trace when one is given;
// otherwise replays the full-suite trace restricted to T_C.
AnalysisOutput analyze(const std::vector<TraceEvent>& events, const AstForest& forest, const CallSiteSet& sites,
                       const FilterResult& filtered, bool merged_trace);

// Writes plans/<name>.json, canonical/<name>.tj and one rendered test file
// per dependency under generated/.
void write_plans(const GenerationResult& gen, const fs::path& out_dir);
std::string generated_file_name(const std::string& method);

RunReport run_pipeline(const RunConfig& config);

}  // namespace carve
