#pragma once

#include <string_view>

namespace hearth::log {

void info(std::string_view msg);
void warn(std::string_view msg);
void error(std::string_view msg);
void set_quiet(bool quiet);

}  // namespace hearth::log
