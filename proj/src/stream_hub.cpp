#include "hearth/stream_hub.hpp"

#include <algorithm>

namespace hearth::service {

std::vector<std::string> StreamHub::Subscriber::wait(std::chrono::milliseconds timeout) {
    std::unique_lock lock(mutex_);
    cv_.wait_for(lock, timeout, [this] { return closed_ || !frames_.empty(); });
    std::vector<std::string> out(std::make_move_iterator(frames_.begin()),
                                 std::make_move_iterator(frames_.end()));
    frames_.clear();
    return out;
}

bool StreamHub::Subscriber::closed() const {
    std::lock_guard lock(mutex_);
    return closed_;
}

bool StreamHub::Subscriber::overflowed() const {
    std::lock_guard lock(mutex_);
    return overflowed_;
}

std::shared_ptr<StreamHub::Subscriber> StreamHub::subscribe(std::string initial_frame) {
    auto sub = std::make_shared<Subscriber>();
    sub->frames_.push_back(std::move(initial_frame));
    std::lock_guard lock(mutex_);
    if (shut_) {
        sub->closed_ = true;
        return sub;
    }
    subs_.push_back(sub);
    return sub;
}

void StreamHub::unsubscribe(const std::shared_ptr<Subscriber>& sub) {
    {
        std::lock_guard lock(sub->mutex_);
        sub->closed_ = true;
    }
    sub->cv_.notify_all();
    std::lock_guard lock(mutex_);
    subs_.erase(std::remove(subs_.begin(), subs_.end(), sub), subs_.end());
}

void StreamHub::publish(const std::string& frame) {
    std::lock_guard lock(mutex_);
    auto it = subs_.begin();
    while (it != subs_.end()) {
        auto& sub = **it;
        bool drop = false;
        {
            std::lock_guard sl(sub.mutex_);
            if (sub.closed_) {
                drop = true;
            } else if (sub.frames_.size() >= limit_) {
                sub.closed_ = true;
                sub.overflowed_ = true;
                sub.frames_.clear();
                drop = true;
            } else {
                sub.frames_.push_back(frame);
            }
        }
        sub.cv_.notify_all();
        it = drop ? subs_.erase(it) : it + 1;
    }
}

void StreamHub::close_all() {
    std::lock_guard lock(mutex_);
    shut_ = true;
    for (auto& sub : subs_) {
        {
            std::lock_guard sl(sub->mutex_);
            sub->closed_ = true;
        }
        sub->cv_.notify_all();
    }
    subs_.clear();
}

std::size_t StreamHub::subscriber_count() const {
    std::lock_guard lock(mutex_);
    return subs_.size();
}

std::string StreamHub::frame(const std::string& data, std::optional<std::string> event,
                             std::optional<std::uint64_t> id) {
    std::string out;
    if (id) out += "id: " + std::to_string(*id) + "\n";
    if (event) out += "event: " + *event + "\n";
    out += "data: " + data + "\n\n";
    return out;
}

}  // namespace hearth::service
