#include "hearth/log.hpp"

#include <atomic>
#include <chrono>
#include <iostream>
#include <mutex>

#include "hearth/datetime.hpp"

namespace hearth::log {

namespace {

std::atomic<bool> g_quiet{false};
std::mutex g_mutex;

void write(std::string_view level, std::string_view msg, bool always) {
    if (g_quiet && !always) return;
    auto now = std::chrono::floor<std::chrono::milliseconds>(std::chrono::system_clock::now());
    std::lock_guard lock(g_mutex);
    std::cerr << format_rfc3339(Instant{now.time_since_epoch()}) << " [" << level << "] " << msg << '\n';
}

}  // namespace

void info(std::string_view msg) { write("info", msg, false); }
void warn(std::string_view msg) { write("warn", msg, false); }
void error(std::string_view msg) { write("error", msg, true); }
void set_quiet(bool quiet) { g_quiet = quiet; }

}  // namespace hearth::log
