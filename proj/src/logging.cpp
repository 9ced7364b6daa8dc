#include "coexist/logging.hpp"

#include <spdlog/sinks/stdout_sinks.h>

#include <cstdlib>
#include <string_view>

namespace coexist {
namespace {

spdlog::level::level_enum level_from_env() {
  const char* env = std::getenv("COEXIST_LOG");
  if (env == nullptr) return spdlog::level::warn;
  std::string_view v(env);
  if (v == "error") return spdlog::level::err;
  if (v == "warn") return spdlog::level::warn;
  if (v == "info") return spdlog::level::info;
  if (v == "debug") return spdlog::level::debug;
  return spdlog::level::warn;
}

}  // namespace

std::shared_ptr<spdlog::logger> logger() {
  static std::shared_ptr<spdlog::logger> instance = [] {
    auto l = spdlog::stderr_logger_mt("coexist");
    l->set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");
    l->set_level(level_from_env());
    return l;
  }();
  return instance;
}

void configure_logging_from_env() { logger()->set_level(level_from_env()); }

}  // namespace coexist
