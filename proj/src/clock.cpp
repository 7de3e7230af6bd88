#include "hearth/clock.hpp"

#include <thread>

#include "hearth/error.hpp"

namespace hearth {

Instant SystemClock::now() const {
    return std::chrono::floor<std::chrono::milliseconds>(std::chrono::system_clock::now());
}

void SystemClock::sleep_for(std::chrono::milliseconds d) {
    if (d.count() > 0) std::this_thread::sleep_for(d);
}

void VirtualClock::advance(std::chrono::milliseconds d) {
    if (d.count() < 0) {
        throw Error(Errc::clock_regression, "virtual clock cannot move backwards");
    }
    now_ms_.fetch_add(d.count());
}

void VirtualClock::set(Instant t) {
    auto target = to_unix_millis(t);
    auto cur = now_ms_.load();
    do {
        if (target < cur) {
            throw Error(Errc::clock_regression, "virtual clock cannot move backwards");
        }
    } while (!now_ms_.compare_exchange_weak(cur, target));
}

}  // namespace hearth
