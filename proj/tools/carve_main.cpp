#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "carve/io.hpp"
#include "carve/pipeline.hpp"

namespace fs = std::filesystem;
using namespace carve;

namespace {

struct Options {
  RunConfig config;
  std::string ast;
  std::string from_trace;
  std::string merged_trace;
};

void add_pipeline_options(CLI::App* cmd, Options& o) {
  auto& c = o.config;
  cmd->add_option("--prod-dir", c.prod_dir, "production code directory")->required();
  cmd->add_option("--test-dir", c.test_dir, "test suite directory")->required();
  cmd->add_option("--component", c.component, "name of the component under test")->required();
  cmd->add_option("--component-file", c.component_file, "file declaring the component");
  cmd->add_option("--out", c.out_dir, "output directory")->capture_default_str();
  cmd->add_option("--harness-cmd", c.harness_cmd, "tracing harness command");
  cmd->add_option("--ast", o.ast, "pre-dumped AST interchange file");
  cmd->add_option("--from-trace", o.from_trace, "recorded full-suite trace; the harness is not run");
  cmd->add_option("--merged-trace", o.merged_trace, "recorded merged-module trace (with --from-trace)");
  cmd->add_flag("--keep-intermediates", c.keep_intermediates, "keep intermediates/ in the output directory");
}

int run(Options& o, const std::string& stop_after) {
  RunConfig c = o.config;
  c.stop_after = stop_after;
  if (!o.ast.empty()) c.ast = o.ast;
  if (!o.from_trace.empty()) c.from_trace = o.from_trace;
  if (!o.merged_trace.empty()) {
    if (o.from_trace.empty()) throw Error(ErrorKind::Usage, "--merged-trace requires --from-trace");
    c.merged_trace = o.merged_trace;
  }
  if (c.harness_cmd.empty() && (!c.ast || !c.from_trace))
    throw Error(ErrorKind::Usage, "without --harness-cmd both --ast and --from-trace are required");
  RunReport report = run_pipeline(c);
  for (const auto& d : report.diagnostics) std::cerr << "note: " << d << '\n';
  if (report.status == "nothing-to-augment") {
    std::cout << "nothing to augment: no test reaches " << c.component << " through its call sites\n";
    return kExitNothingToAugment;
  }
  if (stop_after.empty() || stop_after == "generate")
    std::cout << report_metrics(report);
  else
    std::cout << "intermediates written to " << (c.out_dir / "intermediates").string() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"carve: derive unit tests from integration test executions"};
  app.require_subcommand(1);
  Options opts;
  std::string report_dir = "carve-out";

  struct Verb {
    const char* name;
    const char* help;
    const char* stop;
  };
  const Verb verbs[] = {
      {"resolve", "locate the component and its call sites", "resolve"},
      {"filter", "select the tests that reach the component", "filter"},
      {"analyze", "build seed paths and object-flow slices", "analyze"},
      {"generate", "write test plans and rendered tests", "generate"},
      {"run", "full pipeline including the harness render", ""},
  };
  std::vector<std::pair<CLI::App*, const Verb*>> cmds;
  for (const auto& v : verbs) {
    CLI::App* cmd = app.add_subcommand(v.name, v.help);
    add_pipeline_options(cmd, opts);
    cmds.emplace_back(cmd, &v);
  }
  CLI::App* report_cmd = app.add_subcommand("report", "print the metrics of a finished run");
  report_cmd->add_option("--out", report_dir, "output directory of the run")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitPipelineError;
  }

  try {
    if (report_cmd->parsed()) {
      RunReport r = report_from_json(read_json(fs::path(report_dir) / "report.json"));
      std::cout << report_metrics(r);
      return r.status == "nothing-to-augment" ? kExitNothingToAugment : kExitOk;
    }
    for (const auto& [cmd, verb] : cmds)
      if (cmd->parsed()) return run(opts, verb->stop);
  } catch (const StepError& e) {
    std::cerr << "carve: " << e.what() << '\n';
    return kExitPipelineError;
  } catch (const std::exception& e) {
    std::cerr << "carve: " << e.what() << '\n';
    return kExitPipelineError;
  }
  return kExitPipelineError;
}
