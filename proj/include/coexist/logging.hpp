#pragma once

#include <spdlog/spdlog.h>

#include <memory>

namespace coexist {

/// Library logger. Writes to stderr; level from COEXIST_LOG
/// (error|warn|info|debug, default warn).
std::shared_ptr<spdlog::logger> logger();

/// Re-reads COEXIST_LOG and applies it.
void configure_logging_from_env();

}  // namespace coexist
