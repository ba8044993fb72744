#pragma once

#include "prefforge/pipeline/config.hpp"

#include <atomic>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace prefforge::cli {

enum ExitCode : int { kExitSuccess = 0, kExitFatal = 1, kExitPartial = 2 };

// Hooks for embedding and tests.
struct DispatchContext {
    // Set to request a graceful stop (SIGINT in the real binary).
    const std::atomic<bool>* stop_requested = nullptr;
    // Called on the pipeline configuration after it is built.
    std::function<void(pipeline::PipelineConfig&)> configure;
    // Replaces the retry sleeper, e.g. to skip backoff delays.
    std::optional<provider::Sleeper> sleeper;
};

// Runs one command line (args[0] is the program name). Data goes to files or
// `out`; diagnostics go to `err`. Returns 0 on success, 2 when some records
// failed but outputs were written, 1 on fatal errors.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
             const DispatchContext& context = {});

// Entry point of the executable: installs a SIGINT handler and dispatches
// with the standard streams.
int main_entry(int argc, char** argv);

}  // namespace prefforge::cli
