#pragma once

#include <string>
#include <vector>

#include "sva/config.hpp"

namespace sva {

// Exit codes: 0 success, 1 validation/usage error, 2 I/O error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;

// Dispatches ingest / train / classify / roles / stats / report / check.
int run_command(const std::vector<std::string>& argv);

int cmd_ingest(const RunConfig& cfg);
int cmd_train(const RunConfig& cfg);
int cmd_classify(const RunConfig& cfg);
int cmd_roles(const RunConfig& cfg);
int cmd_stats(const RunConfig& cfg);
int cmd_report(const RunConfig& cfg);
int cmd_check(const RunConfig& cfg);

}  // namespace sva
