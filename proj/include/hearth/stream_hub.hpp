#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace hearth::service {

/// Fan-out of server-sent-event frames to stream subscribers.
///
/// publish() never blocks on a subscriber: a subscriber whose backlog reaches
/// the limit is closed and dropped.
class StreamHub {
public:
    class Subscriber {
    public:
        /// Waits up to `timeout` for frames. Empty result and closed() == true
        /// means the stream is over.
        std::vector<std::string> wait(std::chrono::milliseconds timeout);
        bool closed() const;
        bool overflowed() const;

    private:
        friend class StreamHub;

        mutable std::mutex mutex_;
        std::condition_variable cv_;
        std::deque<std::string> frames_;
        bool closed_ = false;
        bool overflowed_ = false;
    };

    explicit StreamHub(std::size_t backlog_limit = 1024) : limit_(backlog_limit) {}

    std::shared_ptr<Subscriber> subscribe(std::string initial_frame);
    void unsubscribe(const std::shared_ptr<Subscriber>& sub);
    void publish(const std::string& frame);
    /// Closes every subscriber; later subscribers start out closed.
    void close_all();
    std::size_t subscriber_count() const;

    static std::string frame(const std::string& data, std::optional<std::string> event = std::nullopt,
                             std::optional<std::uint64_t> id = std::nullopt);

private:
    std::size_t limit_;
    mutable std::mutex mutex_;
    std::vector<std::shared_ptr<Subscriber>> subs_;
    bool shut_ = false;
};

}  // namespace hearth::service
