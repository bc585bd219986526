#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "aqmsim/fleet.hpp"
#include "aqmsim/harness.hpp"

namespace aqmsim {

// Plain key=value settings, one per line; '#' starts a comment. Unknown keys
// are an error, listed alongside the accepted set.
std::map<std::string, std::string> parse_config_text(const std::string& text);
std::map<std::string, std::string> parse_config_file(const std::filesystem::path& file);

void apply_test_config(const std::map<std::string, std::string>& kv, TestConfig& out);
void apply_fleet_config(const std::map<std::string, std::string>& kv, FleetConfig& out);

// Every accepted key with its current value, suitable as a config file.
std::string print_test_config(const TestConfig& cfg);
std::string print_fleet_config(const FleetConfig& cfg);

}  // namespace aqmsim
