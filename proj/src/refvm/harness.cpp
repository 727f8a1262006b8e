#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <tuple>

#include "carve/error.hpp"
#include "carve/io.hpp"
#include "carve/pipeline.hpp"
#include "carve/refvm.hpp"
#include "carve/surface.hpp"
#include "carve/testgen.hpp"

namespace carve::refvm {

AstForest dump_ast(const std::filesystem::path& prod_dir, const std::filesystem::path& test_dir) {
  for (const auto& d : {prod_dir, test_dir})
    if (!std::filesystem::is_directory(d)) throw Error(ErrorKind::Io, "not a directory: " + d.string());
  auto base = snapshot_base(prod_dir, test_dir);
  std::vector<std::filesystem::path> dirs{prod_dir};
  if (std::filesystem::absolute(test_dir).lexically_normal() != std::filesystem::absolute(prod_dir).lexically_normal())
    dirs.push_back(test_dir);
  auto sources = surface::collect_sources(dirs, base);
  // Overlapping directories list a file twice.
  std::sort(sources.begin(), sources.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
  sources.erase(std::unique(sources.begin(), sources.end(), [](const auto& a, const auto& b) { return a.path == b.path; }),
                sources.end());
  return surface::parse_project(std::move(sources));
}

RunResult trace_suite(const std::filesystem::path& ast, const std::filesystem::path& trace_out, bool merged_only) {
  AstForest forest = load_ast(ast);
  std::vector<Iid> tests = merged_only ? merged_tests(forest) : all_tests(forest);
  if (trace_out.has_parent_path()) std::filesystem::create_directories(trace_out.parent_path());
  std::ofstream out(trace_out, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + trace_out.string());
  RunResult r = run_tests(forest, tests, &out, ast.filename().string());
  out.close();
  if (!out) throw Error(ErrorKind::Io, "write failed: " + trace_out.string());
  return r;
}

std::vector<std::filesystem::path> render_tests(const std::filesystem::path& plan_dir,
                                                const std::filesystem::path& out_dir) {
  std::vector<TestPlan> plans;
  if (std::filesystem::is_directory(plan_dir))
    for (const auto& entry : std::filesystem::directory_iterator(plan_dir))
      if (entry.path().extension() == ".json") plans.push_back(plan_from_json(read_json(entry.path())));
  std::sort(plans.begin(), plans.end(), [](const TestPlan& a, const TestPlan& b) {
    const auto& p = a.provenance;
    const auto& q = b.provenance;
    return std::tie(p.path, p.statement, p.context, a.name) < std::tie(q.path, q.statement, q.context, b.name);
  });
  std::map<std::string, std::vector<const TestPlan*>> by_method;
  for (const auto& p : plans) by_method[p.method].push_back(&p);
  std::vector<std::filesystem::path> written;
  for (const auto& [method, group] : by_method) {
    auto path = out_dir / generated_file_name(method);
    write_text(path, render_plan_file(group));
    written.push_back(path);
  }
  return written;
}

namespace {

void report(const RunResult& r, std::ostream& os) {
  for (const auto& o : r.outcomes)
    os << (o.passed ? "ok   " : "FAIL ") << o.name << (o.passed ? "" : ": " + o.message) << '\n';
}

int usage(std::ostream& os) {
  os << "usage: carve-ref-harness dump-ast <prod-dir> <test-dir> <ast-out>\n"
        "       carve-ref-harness trace <ast> <trace-out>\n"
        "       carve-ref-harness trace-merged <merged-ast> <trace-out> <filter-report>\n"
        "       carve-ref-harness render <plan-dir> <out-dir>\n"
        "       carve-ref-harness check <prod-dir> <test-dir>\n";
  return 64;
}

}  // namespace

int harness_main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  if (args.empty()) return usage(std::cerr);
  const std::string verb = args[0];
  auto need = [&](std::size_t n) {
    if (args.size() != n + 1) throw Error(ErrorKind::Usage, verb + " expects " + std::to_string(n) + " arguments");
  };
  try {
    if (verb == "dump-ast") {
      need(3);
      save_ast(dump_ast(args[1], args[2]), args[3]);
      return 0;
    }
    if (verb == "trace" || verb == "trace-merged") {
      need(verb == "trace" ? 2 : 3);
      if (verb == "trace-merged") filter_result_from_json(read_json(args[3]));  // schema check only
      RunResult r = trace_suite(args[1], args[2], verb == "trace-merged");
      report(r, std::cout);
      // A failing test still yields a usable trace.
      return 0;
    }
    if (verb == "render") {
      need(2);
      for (const auto& p : render_tests(args[1], args[2])) std::cout << p.string() << '\n';
      return 0;
    }
    if (verb == "check") {
      need(2);
      AstForest forest = dump_ast(args[1], args[2]);
      std::string test_dir = snapshot_relative(args[2], snapshot_base(args[1], args[2]));
      std::vector<Iid> tests;
      for (Iid t : all_tests(forest))
        if (path_under(forest.file_of(t), test_dir)) tests.push_back(t);
      RunResult r = run_tests(forest, tests);
      report(r, std::cout);
      std::cout << r.outcomes.size() << " tests, "
                << std::count_if(r.outcomes.begin(), r.outcomes.end(), [](const auto& o) { return !o.passed; })
                << " failed\n";
      return r.all_passed() ? 0 : 1;
    }
    return usage(std::cerr);
  } catch (const Error& e) {
    std::cerr << "carve-ref-harness: " << e.what() << '\n';
    return e.kind() == ErrorKind::Usage ? 64 : 70;
  } catch (const std::exception& e) {
    std::cerr << "carve-ref-harness: " << e.what() << '\n';
    return 70;
  }
}

}  // namespace carve::refvm
