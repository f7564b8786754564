#pragma once

#include "run_config.hpp"

namespace lrcc::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kSolverFailure = 2, kIoError = 3 };

int cmd_gen(const RunConfig& c);
int cmd_graph(const RunConfig& c);
int cmd_fit(const RunConfig& c);
int cmd_path(const RunConfig& c);
int cmd_check(const RunConfig& c);
int cmd_baseline(const RunConfig& c);
int cmd_eval(const RunConfig& c);
int cmd_embed(const RunConfig& c);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::uint8_t* data, std::size_t size, std::uint64_t h = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

}  // namespace lrcc::cli
