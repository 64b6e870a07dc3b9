// SPDX-License-Identifier: Apache-2.0
/// @file cli.hpp
/// @brief Batch front-end shared by the galbrun executable and its tests.
#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace galbrun::cli {

/// Exit codes: 0 pass, 1 domain-check failure, 2 usage, IO or schema error.
inline constexpr int kExitPass = 0;
inline constexpr int kExitDomainFailure = 1;
inline constexpr int kExitUsage = 2;

inline constexpr const char* kToolVersion = "0.1.0";

/// args excludes the program name, e.g. {"check-model", "--config", "m.json", "--out", "run"}.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "%.17e" formatting used for every CSV number.
std::string format_number(double v);

}  // namespace galbrun::cli
