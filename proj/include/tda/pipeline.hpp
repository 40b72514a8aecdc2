#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "tda/config.hpp"

namespace tda {

inline constexpr const char* kToolVersion = "0.1.0";

// Raised for malformed invocations (unknown command, missing arguments).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> command_names();

// Executes one pipeline command, writes its artifacts into
// config.out_dir, and appends a manifest line. Throws UsageError for an
// unknown command and std::runtime_error for everything else.
void run_command(const std::string& command, const RunConfig& config);

}  // namespace tda
