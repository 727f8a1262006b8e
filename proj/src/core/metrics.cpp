#include "carve/metrics.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "carve/error.hpp"

namespace carve {

std::optional<double> augmentation_ratio(std::size_t generated, std::size_t integration) {
  if (integration == 0) return std::nullopt;
  return static_cast<double>(generated) * 100.0 / static_cast<double>(integration);
}

std::string format_percent(double value) {
  double rounded = std::round(value * 100.0) / 100.0;
  if (rounded == 0.0) rounded = 0.0;  // no "-0.0"
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, rounded, std::chars_format::fixed, 2);
  std::string s(buf, res.ptr);
  if (s.back() == '0') s.pop_back();
  return s;
}

std::string report_metrics(const RunReport& r) {
  std::string integration = std::to_string(r.integration_tests);
  if (auto share = augmentation_ratio(r.integration_tests, r.total_tests))
    integration += " (" + format_percent(*share) + "%)";
  auto ratio = augmentation_ratio(r.generated_tests, r.integration_tests);
  std::string ratio_text = ratio ? format_percent(*ratio) + "%" : (r.generated_tests == 0 ? "0.0%" : "n/a");

  const std::pair<const char*, std::string> rows[] = {
      {"#Tests", std::to_string(r.total_tests)},
      {"#Integration Tests (%)", integration},
      {"#Generated Unit Tests", std::to_string(r.generated_tests)},
      {"Augmentation ratio (%)", ratio_text},
  };
  std::ostringstream out;
  if (!r.target.empty()) out << "target: " << r.target << "\n";
  for (const auto& [label, value] : rows) {
    std::string l = label;
    out << l << std::string(l.size() < 24 ? 24 - l.size() : 1, ' ') << value << "\n";
  }
  return out.str();
}

Json report_to_json(const RunReport& r) {
  Json ratio = nullptr;
  if (auto v = augmentation_ratio(r.generated_tests, r.integration_tests)) ratio = format_percent(*v);
  return Json{{"version", 1},
              {"target", r.target},
              {"status", r.status},
              {"tests", r.total_tests},
              {"integrationTests", r.integration_tests},
              {"generatedTests", r.generated_tests},
              {"candidates", r.candidates},
              {"duplicates", r.duplicates},
              {"augmentationRatio", ratio},
              {"plans", r.plans},
              {"diagnostics", r.diagnostics}};
}

RunReport report_from_json(const Json& v) {
  try {
    RunReport r;
    r.target = v.at("target").get<std::string>();
    r.status = v.at("status").get<std::string>();
    r.total_tests = v.at("tests").get<std::size_t>();
    r.integration_tests = v.at("integrationTests").get<std::size_t>();
    r.generated_tests = v.at("generatedTests").get<std::size_t>();
    r.candidates = v.value("candidates", std::size_t{0});
    r.duplicates = v.value("duplicates", std::size_t{0});
    r.plans = v.value("plans", std::vector<std::string>{});
    r.diagnostics = v.value("diagnostics", std::vector<std::string>{});
    return r;
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::Schema, std::string("run report: ") + e.what());
  }
}

}  // namespace carve
