#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ctxfix {

struct ProcessOptions {
    std::vector<std::string> argv;  // argv[0] is resolved through PATH
    std::filesystem::path working_directory;
    std::chrono::milliseconds timeout{std::chrono::seconds(60)};
    /// Soft CPU-time cap (RLIMIT_CPU, seconds) applied in the child; 0 = none.
    int cpu_limit_seconds = 0;
};

struct ProcessResult {
    int exit_code = -1;          // valid when the child exited normally
    int term_signal = 0;         // nonzero when killed by a signal
    bool timed_out = false;
    std::string stdout_text;
    std::string stderr_text;
};

/// Runs a child in its own process group, capturing both streams. On timeout
/// the whole group is killed. Throws ToolUnavailable if exec fails.
ProcessResult run_process(const ProcessOptions& options);

} // namespace ctxfix
