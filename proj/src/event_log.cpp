#include "hearth/event_log.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>

#include "hearth/datetime.hpp"
#include "hearth/error.hpp"

namespace hearth::service {

using nlohmann::json;

namespace {

constexpr EventKind kAllKinds[] = {
    EventKind::StateChanged,      EventKind::TimerFired,      EventKind::TimerMissed,
    EventKind::CommandRecognized, EventKind::CommandRejected, EventKind::MasterSwitched,
    EventKind::TimerAdded,        EventKind::TimerCancelled,
};

}  // namespace

std::string_view to_string(EventKind k) {
    switch (k) {
        case EventKind::StateChanged: return "StateChanged";
        case EventKind::TimerFired: return "TimerFired";
        case EventKind::TimerMissed: return "TimerMissed";
        case EventKind::CommandRecognized: return "CommandRecognized";
        case EventKind::CommandRejected: return "CommandRejected";
        case EventKind::MasterSwitched: return "MasterSwitched";
        case EventKind::TimerAdded: return "TimerAdded";
        case EventKind::TimerCancelled: return "TimerCancelled";
    }
    return "StateChanged";
}

EventKind parse_event_kind(std::string_view text) {
    for (auto k : kAllKinds) {
        if (to_string(k) == text) return k;
    }
    throw Error(Errc::parse_error, "unknown event kind '" + std::string(text) + "'");
}

Source parse_source(std::string_view text) {
    for (auto s : {Source::Manual, Source::Timer, Source::Voice, Source::System}) {
        if (to_string(s) == text) return s;
    }
    throw Error(Errc::parse_error, "unknown event source '" + std::string(text) + "'");
}

json to_json(const Event& e) {
    return json{{"seq", e.seq},
                {"ts", format_rfc3339(e.ts)},
                {"kind", to_string(e.kind)},
                {"source", to_string(e.source)},
                {"payload", e.payload}};
}

Event event_from_json(const json& j) {
    Event e;
    e.seq = j.at("seq").get<std::uint64_t>();
    e.ts = parse_datetime(j.at("ts").get<std::string>(), UtcOffset{}).instant;
    e.kind = parse_event_kind(j.at("kind").get<std::string>());
    e.source = parse_source(j.at("source").get<std::string>());
    e.payload = j.value("payload", json::object());
    return e;
}

EventLog::EventLog(std::optional<std::filesystem::path> file) : file_(std::move(file)) {
    if (!file_) return;

    if (std::filesystem::exists(*file_)) {
        std::ifstream in(*file_, std::ios::binary);
        if (!in) throw Error(Errc::persistence_io, "cannot read event log " + file_->string());
        std::string data{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};

        std::size_t pos = 0;
        std::size_t good_end = 0;
        int lineno = 0;
        while (pos < data.size()) {
            auto nl = data.find('\n', pos);
            bool last = nl == std::string::npos || nl + 1 >= data.size();
            auto line = data.substr(pos, (nl == std::string::npos ? data.size() : nl) - pos);
            ++lineno;
            try {
                if (nl == std::string::npos) throw Error(Errc::persistence_io, "unterminated record");
                if (!line.empty()) {
                    auto e = event_from_json(json::parse(line));
                    if (e.seq < next_seq_) {
                        throw Error(Errc::persistence_io, "sequence numbers out of order");
                    }
                    next_seq_ = e.seq + 1;
                    events_.push_back(std::move(e));
                }
                good_end = nl + 1;
            } catch (const std::exception& ex) {
                if (!last) {
                    throw Error(Errc::persistence_io, file_->string() + ":" + std::to_string(lineno) +
                                                          ": corrupt event record: " + ex.what());
                }
                break;
            }
            pos = nl == std::string::npos ? data.size() : nl + 1;
        }
        if (good_end < data.size()) {
            std::error_code ec;
            std::filesystem::resize_file(*file_, good_end, ec);
            if (ec) throw Error(Errc::persistence_io, "cannot truncate " + file_->string());
        }
    }

    fd_ = ::open(file_->c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd_ < 0) {
        throw Error(Errc::persistence_io,
                    "cannot open event log " + file_->string() + ": " + std::strerror(errno));
    }
}

EventLog::~EventLog() {
    if (fd_ >= 0) ::close(fd_);
}

const Event& EventLog::append(Instant ts, EventKind kind, Source source, json payload) {
    Event e{next_seq_, ts, kind, source, std::move(payload)};
    if (fd_ >= 0) {
        auto line = to_json(e).dump() + "\n";
        const char* p = line.data();
        std::size_t left = line.size();
        while (left > 0) {
            auto n = ::write(fd_, p, left);
            if (n < 0) {
                if (errno == EINTR) continue;
                throw Error(Errc::persistence_io,
                            "event log write failed: " + std::string(std::strerror(errno)));
            }
            p += n;
            left -= static_cast<std::size_t>(n);
        }
    }
    ++next_seq_;
    events_.push_back(std::move(e));
    return events_.back();
}

std::vector<Event> EventLog::since(std::uint64_t since) const {
    auto it = std::upper_bound(events_.begin(), events_.end(), since,
                               [](std::uint64_t s, const Event& e) { return s < e.seq; });
    return {it, events_.end()};
}

void EventLog::reserve_through(std::uint64_t seq) { next_seq_ = std::max(next_seq_, seq + 1); }

}  // namespace hearth::service
