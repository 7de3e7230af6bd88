#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hearth/appliance_registry.hpp"
#include "hearth/clock.hpp"
#include "hearth/datetime.hpp"

namespace hearth {

enum class JobStatus { Pending, Fired, Missed, Cancelled };

std::string_view to_string(JobStatus s);
/// Case-insensitive. Throws Errc::invalid_request.
JobStatus parse_job_status(std::string_view text);

struct TimerJob {
    std::string id;
    ZonedTime fire_at;
    int channel = 0;
    PowerState desired = PowerState::On;
    std::uint64_t seq = 0;
    JobStatus status = JobStatus::Pending;
    std::optional<Instant> resolved_at;
};

struct CancelResult {
    TimerJob job;
    bool changed = false;
};

/// One-shot date/time jobs.
///
/// tick(now) resolves every pending job with fire_at <= now, in (fire_at, seq)
/// order: a job at most `grace` late fires, anything later is marked missed.
/// The callback sees each resolved job in that order; applying the state
/// change of a fired job is the caller's business.
class TimerScheduler {
public:
    using ChannelCheck = std::function<bool(int)>;
    using ResolveHandler = std::function<void(const TimerJob&)>;

    explicit TimerScheduler(std::chrono::seconds grace = std::chrono::seconds{60},
                            ChannelCheck channel_known = {});

    std::chrono::seconds grace() const { return grace_; }

    /// Throws Errc::unknown_channel.
    const TimerJob& add_job(ZonedTime fire_at, int channel, PowerState desired);
    /// Throws Errc::unparseable_datetime or Errc::unknown_channel.
    const TimerJob& add_job(std::string_view fire_at, UtcOffset naive_zone, int channel,
                            PowerState desired);

    /// Pending jobs become Cancelled; terminal jobs are returned unchanged.
    CancelResult cancel_job(std::string_view id);

    /// Throws Errc::clock_regression if `now` is before the previous tick.
    std::vector<TimerJob> tick(Instant now, const ResolveHandler& on_resolve = {});

    std::vector<TimerJob> list_jobs(std::optional<JobStatus> filter = std::nullopt) const;
    const TimerJob& get(std::string_view id) const;
    bool contains(std::string_view id) const { return jobs_.find(id) != jobs_.end(); }

    std::optional<Instant> last_tick() const { return last_tick_; }
    std::uint64_t next_seq() const { return next_seq_; }

    /// Re-inserts a persisted job as-is; bumps the sequence counter past it.
    void restore(TimerJob job);
    /// Marks a pending job resolved without firing (log replay on recovery).
    void mark_resolved(std::string_view id, JobStatus status, std::optional<Instant> at);
    void set_next_seq(std::uint64_t seq);

private:
    using OrderKey = std::pair<Instant, std::uint64_t>;

    TimerJob& find(std::string_view id);

    std::chrono::seconds grace_;
    ChannelCheck channel_known_;
    std::map<std::string, TimerJob, std::less<>> jobs_;
    std::map<OrderKey, std::string> pending_;
    std::uint64_t next_seq_ = 1;
    std::optional<Instant> last_tick_;
};

}  // namespace hearth
