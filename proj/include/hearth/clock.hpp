#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>

namespace hearth {

using Instant = std::chrono::sys_time<std::chrono::milliseconds>;

inline std::int64_t to_unix_millis(Instant t) {
    return t.time_since_epoch().count();
}

inline Instant from_unix_millis(std::int64_t ms) {
    return Instant{std::chrono::milliseconds{ms}};
}

/// Time source shared by the simulator (relay settle time) and the scheduler.
class Clock {
public:
    virtual ~Clock() = default;

    virtual Instant now() const = 0;
    virtual void sleep_for(std::chrono::milliseconds d) = 0;
    virtual bool is_virtual() const = 0;
};

class SystemClock final : public Clock {
public:
    Instant now() const override;
    void sleep_for(std::chrono::milliseconds d) override;
    bool is_virtual() const override { return false; }
};

/// Manually driven clock. Only moves forward; sleep_for advances it instantly.
class VirtualClock final : public Clock {
public:
    explicit VirtualClock(Instant start) : now_ms_(to_unix_millis(start)) {}

    Instant now() const override { return from_unix_millis(now_ms_.load()); }
    void sleep_for(std::chrono::milliseconds d) override { advance(d); }
    bool is_virtual() const override { return true; }

    void advance(std::chrono::milliseconds d);
    /// Throws Errc::clock_regression if `t` is earlier than the current time.
    void set(Instant t);

private:
    std::atomic<std::int64_t> now_ms_;
};

}  // namespace hearth
