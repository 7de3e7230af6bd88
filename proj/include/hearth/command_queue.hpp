#pragma once

#include <condition_variable>
#include <deque>
#include <functional>
#include <future>
#include <memory>
#include <mutex>
#include <thread>
#include <type_traits>

namespace hearth::service {

/// Single worker thread that runs submitted tasks one at a time, in order.
class CommandQueue {
public:
    CommandQueue() : worker_([this] { run(); }) {}
    ~CommandQueue() { stop(); }

    CommandQueue(const CommandQueue&) = delete;
    CommandQueue& operator=(const CommandQueue&) = delete;

    template <class F>
    auto submit(F&& f) -> std::future<std::invoke_result_t<F>> {
        using R = std::invoke_result_t<F>;
        auto task = std::make_shared<std::packaged_task<R()>>(std::forward<F>(f));
        auto fut = task->get_future();
        {
            std::lock_guard lock(mutex_);
            if (stopping_) throw std::runtime_error("command queue stopped");
            tasks_.emplace_back([task] { (*task)(); });
        }
        cv_.notify_one();
        return fut;
    }

    /// Runs `f` on the worker and waits for the result (exceptions propagate).
    template <class F>
    auto call(F&& f) -> std::invoke_result_t<F> {
        if (std::this_thread::get_id() == worker_.get_id()) return f();
        return submit(std::forward<F>(f)).get();
    }

    /// Drains queued tasks, then joins the worker.
    void stop() {
        {
            std::lock_guard lock(mutex_);
            if (stopping_ && !worker_.joinable()) return;
            stopping_ = true;
        }
        cv_.notify_one();
        if (worker_.joinable() && std::this_thread::get_id() != worker_.get_id()) worker_.join();
    }

private:
    void run() {
        for (;;) {
            std::function<void()> task;
            {
                std::unique_lock lock(mutex_);
                cv_.wait(lock, [this] { return stopping_ || !tasks_.empty(); });
                if (tasks_.empty()) return;
                task = std::move(tasks_.front());
                tasks_.pop_front();
            }
            task();
        }
    }

    std::mutex mutex_;
    std::condition_variable cv_;
    std::deque<std::function<void()>> tasks_;
    bool stopping_ = false;
    std::thread worker_;
};

}  // namespace hearth::service
