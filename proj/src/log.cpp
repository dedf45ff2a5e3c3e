#include "conserva/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace conserva::log {

Level threshold() {
  static const Level cached = [] {
    const char* env = std::getenv("CONSERVA_LOG");
    if (env == nullptr) return Level::warn;
    if (std::strcmp(env, "error") == 0) return Level::error;
    if (std::strcmp(env, "warn") == 0) return Level::warn;
    if (std::strcmp(env, "info") == 0) return Level::info;
    if (std::strcmp(env, "debug") == 0) return Level::debug;
    return Level::warn;
  }();
  return cached;
}

void write(Level level, const std::string& message) {
  if (static_cast<int>(level) > static_cast<int>(threshold())) return;
  static const char* names[] = {"error", "warn", "info", "debug"};
  std::fprintf(stderr, "[conserva:%s] %s\n", names[static_cast<int>(level)], message.c_str());
}

}  // namespace conserva::log
