#pragma once

#include <string>

#include "specwave/config.hpp"

namespace specwave {

/// Command runners shared by the CLI and the acceptance suite. Each writes
/// its artifact files under out_dir and returns the process exit code:
/// 0 = pass, 1 = certificate/hypothesis failure, 2 = configuration error
/// (the CLI maps ConfigError to 2; runners throw it through).
struct PipelineContext {
    Scenario scenario;
    std::string out_dir;
    int threads = 1;
};

int cmd_verify_hypotheses(const PipelineContext& ctx);
int cmd_decay(const PipelineContext& ctx);
int cmd_regularity(const PipelineContext& ctx);
int cmd_attractor_sweep(const PipelineContext& ctx);
int cmd_report(const std::string& out_dir);

}  // namespace specwave
