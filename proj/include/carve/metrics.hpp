#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "carve/ast.hpp"

namespace carve {

struct RunReport {
  std::string target;
  std::string status = "ok";  // "ok" or "nothing-to-augment"
  std::size_t total_tests = 0;
  std::size_t integration_tests = 0;  // |T_C|
  std::size_t generated_tests = 0;
  std::size_t candidates = 0;
  std::size_t duplicates = 0;
  std::vector<std::string> plans;
  std::vector<std::string> diagnostics;
  // Wall-clock per step in milliseconds. Not serialized: reports must be
  // byte-identical across runs.
  std::map<std::string, double> timings_ms;
};

// generated / integration * 100; nullopt when integration is zero.
std::optional<double> augmentation_ratio(std::size_t generated, std::size_t integration);
// Rounded to two decimals, trailing zeros trimmed down to one decimal.
std::string format_percent(double value);

// Plain-text table with the suite feature columns.
std::string report_metrics(const RunReport& report);

Json report_to_json(const RunReport& report);
RunReport report_from_json(const Json& v);

}  // namespace carve
