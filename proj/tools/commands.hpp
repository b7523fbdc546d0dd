#pragma once

#include "run_config.hpp"

namespace dbdtc::cli {

// Each returns the process exit code and throws on invalid input or I/O
// failure. Data goes to files under cfg.out (or stdout for draw); progress
// goes to stderr unless cfg.quiet.
int cmd_generate(const RunConfig& cfg);
int cmd_optimize(const RunConfig& cfg);
int cmd_draw(const RunConfig& cfg);
int cmd_evaluate(const RunConfig& cfg);
int cmd_benchmark(const RunConfig& cfg);

}  // namespace dbdtc::cli
