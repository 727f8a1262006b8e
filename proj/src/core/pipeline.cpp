#include "carve/pipeline.hpp"

#include <chrono>
#include <cstdlib>
#include <set>

#include "carve/io.hpp"

namespace carve {

namespace {

template <typename F>
auto timed_step(const std::string& name, RunReport& report, F&& f) {
  auto start = std::chrono::steady_clock::now();
  auto finish = [&] {
    report.timings_ms[name] =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  };
  try {
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      finish();
    } else {
      auto out = f();
      finish();
      return out;
    }
  } catch (const Error& e) {
    throw StepError(name, e);
  } catch (const std::filesystem::filesystem_error& e) {
    throw StepError(name, Error(ErrorKind::Io, e.what()));
  }
}

std::vector<TraceEvent> load_events(const fs::path& p) {
  if (!fs::exists(p)) throw Error(ErrorKind::Io, "trace not found: " + p.string());
  return load_trace(p);
}

}  // namespace

fs::path snapshot_base(const fs::path& prod_dir, const fs::path& test_dir) {
  fs::path a = fs::absolute(prod_dir).lexically_normal();
  fs::path b = fs::absolute(test_dir).lexically_normal();
  fs::path out;
  auto i = a.begin();
  auto j = b.begin();
  for (; i != a.end() && j != b.end() && *i == *j; ++i, ++j)
    if (!i->empty()) out /= *i;
  return out;
}

std::string snapshot_relative(const fs::path& p, const fs::path& base) {
  fs::path rel = fs::absolute(p).lexically_normal().lexically_relative(base);
  std::string s = rel.generic_string();
  while (s.size() > 1 && s.back() == '/') s.pop_back();
  return s.empty() ? "." : s;
}

std::string shell_quote(const std::string& arg) {
  std::string out = "'";
  for (char c : arg) {
    if (c == '\'') out += "'\\''";
    else out += c;
  }
  return out + "'";
}

void run_harness(const std::string& harness_cmd, const std::vector<std::string>& args, const fs::path& log) {
  if (harness_cmd.empty()) throw Error(ErrorKind::Usage, "no harness command configured");
  std::string cmd = harness_cmd;
  for (const auto& a : args) cmd += " " + shell_quote(a);
  fs::create_directories(log.parent_path());
  int rc = std::system((cmd + " > " + shell_quote(log.string()) + " 2>&1").c_str());
  if (rc != 0) {
    std::string output = fs::exists(log) ? read_text(log) : std::string();
    if (output.size() > 4000) output = "..." + output.substr(output.size() - 4000);
    throw Error(ErrorKind::Subprocess, "harness command failed (status " + std::to_string(rc) + "): " + cmd +
                                           (output.empty() ? "" : "\n" + output));
  }
}

TargetSpec target_spec(const RunConfig& config) {
  if (config.component.empty()) throw Error(ErrorKind::Usage, "--component is required");
  if (config.test_dir.empty() || config.prod_dir.empty())
    throw Error(ErrorKind::Usage, "--prod-dir and --test-dir are required");
  fs::path base = snapshot_base(config.prod_dir, config.test_dir);
  TargetSpec spec;
  spec.component_name = config.component;
  spec.production_dir = snapshot_relative(config.prod_dir, base);
  spec.test_dir = snapshot_relative(config.test_dir, base);
  if (!config.component_file.empty()) {
    fs::path f = config.component_file;
    spec.component_file = fs::exists(f) ? snapshot_relative(f, base) : f.lexically_normal().generic_string();
  }
  return spec;
}

AstForest obtain_ast(const RunConfig& config, const fs::path& work) {
  if (config.ast) {
    if (!fs::exists(*config.ast)) throw Error(ErrorKind::Io, "AST dump not found: " + config.ast->string());
    return load_ast(*config.ast);
  }
  fs::path out = work / "ast.json";
  run_harness(config.harness_cmd, {"dump-ast", config.prod_dir.string(), config.test_dir.string(), out.string()},
              work / "harness-dump-ast.log");
  return load_ast(out);
}

AnalysisOutput analyze(const std::vector<TraceEvent>& events, const AstForest& forest, const CallSiteSet& sites,
                       const FilterResult& filtered, bool merged_trace) {
  std::optional<std::set<Iid>> only;
  if (!merged_trace) only = std::set<Iid>(filtered.tests.begin(), filtered.tests.end());
  AnalysisOutput out{build_seed_paths(events, forest, sites, only), {}};
  out.slices = compute_all_slices(out.analysis);
  return out;
}

std::string generated_file_name(const std::string& method) { return method + ".carved_test.tj"; }

void write_plans(const GenerationResult& gen, const fs::path& out_dir) {
  std::map<std::string, std::vector<const TestPlan*>> by_method;
  for (const auto& p : gen.plans) {
    write_json(out_dir / "plans" / (p.name + ".json"), plan_to_json(p));
    write_text(out_dir / "canonical" / (p.name + ".tj"), render_plan(p));
    by_method[p.method].push_back(&p);
  }
  for (const auto& [method, plans] : by_method)
    write_text(out_dir / "generated" / generated_file_name(method), render_plan_file(plans));
}

RunReport run_pipeline(const RunConfig& config) {
  RunReport report;
  report.target = config.component;
  const fs::path out = config.out_dir;
  const fs::path work = out / "intermediates";
  fs::create_directories(work);

  TargetSpec spec = timed_step("config", report, [&] { return target_spec(config); });
  AstForest forest = timed_step("dump-ast", report, [&] { return obtain_ast(config, work); });
  CallSiteSet sites = timed_step("resolve", report, [&] { return resolve(forest, spec); });
  write_json(work / "resolution.json", call_sites_to_json(sites));
  report.total_tests = sites.test_iids.size();
  report.diagnostics.insert(report.diagnostics.end(), sites.diagnostics.begin(), sites.diagnostics.end());

  auto finish = [&] {
    write_json(out / "report.json", report_to_json(report));
    write_text(out / "report.txt", report_metrics(report));
    if (!config.keep_intermediates && config.stop_after.empty()) fs::remove_all(work);
    return report;
  };
  auto stop_here = [&](const char* step) {
    if (config.stop_after != step) return false;
    report.status = std::string("stopped-after-") + step;
    return true;
  };
  if (stop_here("resolve")) return finish();

  fs::path full_trace = config.from_trace.value_or(work / "trace.jsonl");
  if (!config.from_trace)
    timed_step("trace", report, [&] {
      fs::path ast_path = config.ast.value_or(work / "ast.json");
      run_harness(config.harness_cmd, {"trace", ast_path.string(), full_trace.string()}, work / "harness-trace.log");
    });
  FilterResult filtered = timed_step("filter", report, [&] { return filter_tests(load_events(full_trace), forest, sites); });
  write_json(work / "filter.json", filter_result_to_json(filtered));
  report.integration_tests = filtered.tests.size();
  report.diagnostics.insert(report.diagnostics.end(), filtered.warnings.begin(), filtered.warnings.end());

  std::optional<AstForest> merged = timed_step("merge", report, [&] {
    return merge_filtered_tests(filtered, forest, spec.test_dir);
  });
  if (!merged) {
    report.status = "nothing-to-augment";
    return finish();
  }
  if (stop_here("filter")) return finish();
  fs::path merged_ast = work / "merged_ast.json";
  save_ast(*merged, merged_ast);

  std::optional<fs::path> merged_trace = config.merged_trace;
  if (!merged_trace && !config.from_trace) {
    merged_trace = work / "merged_trace.jsonl";
    timed_step("trace-merged", report, [&] {
      run_harness(config.harness_cmd,
                  {"trace-merged", merged_ast.string(), merged_trace->string(), (work / "filter.json").string()},
                  work / "harness-trace-merged.log");
    });
  }

  AnalysisOutput analysis = timed_step("analyze", report, [&] {
    if (merged_trace) return analyze(load_events(*merged_trace), *merged, sites, filtered, true);
    return analyze(load_events(full_trace), forest, sites, filtered, false);
  });
  write_json(work / "analysis.json", analysis_to_json(analysis.analysis));
  write_json(work / "slices.json", slices_to_json(analysis.slices));
  report.diagnostics.insert(report.diagnostics.end(), analysis.analysis.warnings.begin(),
                            analysis.analysis.warnings.end());
  if (stop_here("analyze")) return finish();

  const AstForest& gen_forest = merged_trace ? *merged : forest;
  GenerationResult gen = timed_step("generate", report, [&] {
    return generate_all(analysis.analysis, analysis.slices, sites, gen_forest);
  });
  report.candidates = gen.candidates;
  report.duplicates = gen.duplicates;
  report.generated_tests = gen.plans.size();
  for (const auto& p : gen.plans) report.plans.push_back(p.name);
  for (const auto& f : gen.failures)
    report.diagnostics.push_back("plan for site " + std::to_string(f.provenance.site_iid) + " at statement " +
                                 std::to_string(f.provenance.statement) + " of test " +
                                 std::to_string(f.provenance.test_iid) + " skipped: " + f.message);

  timed_step("write", report, [&] {
    for (const char* dir : {"plans", "canonical", "generated"}) fs::remove_all(out / dir);
    write_plans(gen, out);
    if (!config.harness_cmd.empty() && !config.from_trace && config.stop_after != "generate") {
      fs::remove_all(out / "generated");
      run_harness(config.harness_cmd, {"render", (out / "plans").string(), (out / "generated").string()},
                  work / "harness-render.log");
    }
  });
  return finish();
}

}  // namespace carve
