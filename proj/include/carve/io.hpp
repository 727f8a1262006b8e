#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

namespace carve {

std::string read_text(const std::filesystem::path& path);
// Creates parent directories as needed.
void write_text(const std::filesystem::path& path, const std::string& text);

nlohmann::json read_json(const std::filesystem::path& path);
// Pretty-printed with two-space indent and a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& value);

}  // namespace carve
