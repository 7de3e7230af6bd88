#pragma once

#include <atomic>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "hearth/clock.hpp"
#include "hearth/command_queue.hpp"
#include "hearth/config.hpp"
#include "hearth/controller.hpp"
#include "hearth/stream_hub.hpp"

namespace httplib {
class Server;
}

namespace hearth::service {

/// HTTP control plane around a Controller.
///
/// Request handlers run on the HTTP thread pool; every controller call is
/// funneled through one CommandQueue, so mutations and the event log share a
/// single total order.
class Service {
public:
    Service(Config config, Clock& clock);
    ~Service();

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Recovers persisted state, binds the listener and starts the ticker.
    /// `port` 0 picks a free port. Throws Errc::corrupt_snapshot,
    /// Errc::persistence_io, or Errc::port_in_use when the address is taken.
    RecoveryReport start(const std::string& host, int port);
    RecoveryReport start() { return start(config_.bind_address, config_.http_port); }

    /// Closes streams, stops the listener and ticker, writes a final snapshot.
    void stop();

    int port() const { return port_; }
    bool running() const { return running_; }

    /// Runs `f(controller)` on the command queue and returns its result.
    template <class F>
    auto call(F&& f) {
        return queue_.call([this, &f] { return f(*controller_); });
    }

    StreamHub& hub() { return hub_; }

private:
    void setup_routes();
    void ticker_loop();

    Config config_;
    Clock& clock_;
    std::unique_ptr<Controller> controller_;
    CommandQueue queue_;
    StreamHub hub_;
    std::unique_ptr<httplib::Server> server_;
    std::thread listen_thread_;
    std::thread ticker_thread_;
    std::mutex ticker_mutex_;
    std::condition_variable ticker_cv_;
    bool ticker_stop_ = false;
    std::atomic<bool> running_{false};
    int port_ = 0;
};

}  // namespace hearth::service
