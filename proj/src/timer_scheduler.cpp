#include "hearth/timer_scheduler.hpp"

#include <algorithm>

#include "hearth/error.hpp"

namespace hearth {

std::string_view to_string(JobStatus s) {
    switch (s) {
        case JobStatus::Pending: return "pending";
        case JobStatus::Fired: return "fired";
        case JobStatus::Missed: return "missed";
        case JobStatus::Cancelled: return "cancelled";
    }
    return "pending";
}

JobStatus parse_job_status(std::string_view text) {
    for (auto s : {JobStatus::Pending, JobStatus::Fired, JobStatus::Missed, JobStatus::Cancelled}) {
        if (iequals(text, to_string(s))) return s;
    }
    throw Error(Errc::invalid_request, "unknown job status '" + std::string(text) + "'");
}

TimerScheduler::TimerScheduler(std::chrono::seconds grace, ChannelCheck channel_known)
    : grace_(grace), channel_known_(std::move(channel_known)) {}

const TimerJob& TimerScheduler::add_job(ZonedTime fire_at, int channel, PowerState desired) {
    if (channel_known_ && !channel_known_(channel)) {
        throw Error(Errc::unknown_channel, "no appliance on channel " + std::to_string(channel));
    }
    TimerJob job;
    job.seq = next_seq_++;
    job.id = "job-" + std::to_string(job.seq);
    job.fire_at = fire_at;
    job.channel = channel;
    job.desired = desired;
    pending_.emplace(OrderKey{fire_at.instant, job.seq}, job.id);
    auto [it, _] = jobs_.emplace(job.id, std::move(job));
    return it->second;
}

const TimerJob& TimerScheduler::add_job(std::string_view fire_at, UtcOffset naive_zone, int channel,
                                        PowerState desired) {
    return add_job(parse_datetime(fire_at, naive_zone), channel, desired);
}

TimerJob& TimerScheduler::find(std::string_view id) {
    auto it = jobs_.find(id);
    if (it == jobs_.end()) throw Error(Errc::unknown_id, "no timer job '" + std::string(id) + "'");
    return it->second;
}

const TimerJob& TimerScheduler::get(std::string_view id) const {
    return const_cast<TimerScheduler*>(this)->find(id);
}

CancelResult TimerScheduler::cancel_job(std::string_view id) {
    auto& job = find(id);
    if (job.status != JobStatus::Pending) return CancelResult{job, false};
    pending_.erase(OrderKey{job.fire_at.instant, job.seq});
    job.status = JobStatus::Cancelled;
    return CancelResult{job, true};
}

std::vector<TimerJob> TimerScheduler::tick(Instant now, const ResolveHandler& on_resolve) {
    if (last_tick_ && now < *last_tick_) {
        throw Error(Errc::clock_regression, "tick at " + format_rfc3339(now) +
                                                " is before previous tick " + format_rfc3339(*last_tick_));
    }
    last_tick_ = now;

    std::vector<TimerJob> resolved;
    while (!pending_.empty()) {
        auto it = pending_.begin();
        if (it->first.first > now) break;
        auto& job = jobs_.at(it->second);
        pending_.erase(it);
        job.status = (now - job.fire_at.instant) <= grace_ ? JobStatus::Fired : JobStatus::Missed;
        job.resolved_at = now;
        if (on_resolve) on_resolve(job);
        resolved.push_back(job);
    }
    return resolved;
}

std::vector<TimerJob> TimerScheduler::list_jobs(std::optional<JobStatus> filter) const {
    std::vector<TimerJob> out;
    for (const auto& [id, job] : jobs_) {
        if (!filter || job.status == *filter) out.push_back(job);
    }
    std::sort(out.begin(), out.end(), [](const TimerJob& a, const TimerJob& b) {
        return OrderKey{a.fire_at.instant, a.seq} < OrderKey{b.fire_at.instant, b.seq};
    });
    return out;
}

void TimerScheduler::restore(TimerJob job) {
    if (jobs_.contains(job.id)) {
        throw Error(Errc::corrupt_snapshot, "timer job '" + job.id + "' restored twice");
    }
    next_seq_ = std::max(next_seq_, job.seq + 1);
    if (job.status == JobStatus::Pending) {
        pending_.emplace(OrderKey{job.fire_at.instant, job.seq}, job.id);
    }
    auto id = job.id;
    jobs_.emplace(std::move(id), std::move(job));
}

void TimerScheduler::mark_resolved(std::string_view id, JobStatus status, std::optional<Instant> at) {
    auto& job = find(id);
    if (job.status != JobStatus::Pending) return;
    pending_.erase(OrderKey{job.fire_at.instant, job.seq});
    job.status = status;
    job.resolved_at = at;
}

void TimerScheduler::set_next_seq(std::uint64_t seq) { next_seq_ = std::max(next_seq_, seq); }

}  // namespace hearth
