#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "hearth/appliance_registry.hpp"
#include "hearth/clock.hpp"

namespace hearth::service {

enum class EventKind {
    StateChanged,
    TimerFired,
    TimerMissed,
    CommandRecognized,
    CommandRejected,
    MasterSwitched,
    TimerAdded,
    TimerCancelled,
};

std::string_view to_string(EventKind k);
EventKind parse_event_kind(std::string_view text);
Source parse_source(std::string_view text);

struct Event {
    std::uint64_t seq = 0;
    Instant ts;
    EventKind kind = EventKind::StateChanged;
    Source source = Source::System;
    nlohmann::json payload;
};

nlohmann::json to_json(const Event& e);
Event event_from_json(const nlohmann::json& j);

/// Append-only event log, one JSON object per line. Every append is written
/// through to the file before it returns.
class EventLog {
public:
    /// Loads an existing log file. A torn final line (crash mid-write) is dropped.
    /// Throws Errc::persistence_io.
    explicit EventLog(std::optional<std::filesystem::path> file = std::nullopt);
    ~EventLog();

    EventLog(const EventLog&) = delete;
    EventLog& operator=(const EventLog&) = delete;

    const Event& append(Instant ts, EventKind kind, Source source, nlohmann::json payload);

    /// Events with seq > since, in order.
    std::vector<Event> since(std::uint64_t since) const;
    std::uint64_t last_seq() const { return next_seq_ - 1; }
    std::size_t size() const { return events_.size(); }

    /// Never hand out sequence numbers at or below `seq`.
    void reserve_through(std::uint64_t seq);

private:
    std::optional<std::filesystem::path> file_;
    int fd_ = -1;
    std::vector<Event> events_;
    std::uint64_t next_seq_ = 1;
};

}  // namespace hearth::service
