#pragma once

#include <functional>
#include <string>

namespace hwqa::log {

enum class Level { Info, Warning };

using Sink = std::function<void(Level, const std::string&)>;

// Replaces the process-wide sink; returns the previous one. The default sink
// writes to stderr.
Sink set_sink(Sink sink);

void info(const std::string& message);
void warn(const std::string& message);

}  // namespace hwqa::log
