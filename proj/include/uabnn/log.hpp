/* Copyright 2026 The uabnn Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef UABNN_LOG_HPP_
#define UABNN_LOG_HPP_

#include <functional>
#include <string_view>

namespace uabnn {

enum class LogLevel : int { kQuiet = 0, kWarning = 1, kInfo = 2, kDebug = 3 };

// Process-wide. Default level is kWarning; default sink is stderr.
void set_log_level(LogLevel level);
LogLevel log_level();

using LogSink = std::function<void(LogLevel, std::string_view)>;
// Passing an empty function restores the stderr sink.
void set_log_sink(LogSink sink);

void log_message(LogLevel level, std::string_view message);
inline void log_warning(std::string_view m) { log_message(LogLevel::kWarning, m); }
inline void log_info(std::string_view m) { log_message(LogLevel::kInfo, m); }
inline void log_debug(std::string_view m) { log_message(LogLevel::kDebug, m); }

}  // namespace uabnn

#endif  // UABNN_LOG_HPP_
