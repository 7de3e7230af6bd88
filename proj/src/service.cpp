#include "hearth/service.hpp"

#include "httplib.h"

#include "hearth/codec.hpp"
#include "hearth/error.hpp"
#include "hearth/log.hpp"

namespace hearth::service {

using nlohmann::json;

namespace {

constexpr const char* kJson = "application/json";

int status_for(Errc code) {
    switch (code) {
        case Errc::unknown_appliance:
        case Errc::unknown_channel:
        case Errc::unknown_id:
        case Errc::unknown_port:
        case Errc::unknown_word:
            return 404;
        case Errc::duplicate_channel:
        case Errc::duplicate_name:
        case Errc::clock_regression:
        case Errc::not_supported:
            return 409;
        case Errc::persistence_io:
        case Errc::corrupt_snapshot:
            return 500;
        default:
            return 400;
    }
}

void send_json(httplib::Response& res, const json& body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(), kJson);
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
    send_json(res, json{{"error", {{"code", code}, {"message", message}}}}, status);
}

template <class F>
void guarded(httplib::Response& res, F&& f) {
    try {
        f();
    } catch (const Error& e) {
        send_error(res, status_for(e.code()), errc_name(e.code()), e.what());
    } catch (const json::exception& e) {
        send_error(res, 400, "invalid-request", e.what());
    } catch (const std::exception& e) {
        send_error(res, 500, "internal", e.what());
    }
}

json parse_body(const httplib::Request& req) {
    json body;
    try {
        body = json::parse(req.body);
    } catch (const json::parse_error&) {
        throw Error(Errc::invalid_request, "request body must be JSON");
    }
    if (!body.is_object()) throw Error(Errc::invalid_request, "request body must be a JSON object");
    return body;
}

std::string require_string(const json& body, const char* key) {
    if (!body.contains(key) || !body.at(key).is_string()) {
        throw Error(Errc::invalid_request, std::string("field '") + key + "' must be a string");
    }
    return body.at(key).get<std::string>();
}

Utterance utterance_from_body(const json& body) {
    if (body.contains("word")) {
        return Utterance{Utterance::Kind::Word, require_string(body, "word")};
    }
    if (body.contains("phonemes")) {
        const auto& ph = body.at("phonemes");
        if (ph.is_string()) return Utterance{Utterance::Kind::Phonemes, ph.get<std::string>()};
        if (ph.is_array()) {
            std::string joined;
            for (const auto& p : ph) {
                if (!p.is_string()) throw Error(Errc::invalid_request, "phonemes must be strings");
                if (!joined.empty()) joined += ' ';
                joined += p.get<std::string>();
            }
            return Utterance{Utterance::Kind::Phonemes, joined};
        }
        throw Error(Errc::invalid_request, "'phonemes' must be a string or an array");
    }
    if (body.contains("utterance")) return parse_utterance(require_string(body, "utterance"));
    throw Error(Errc::invalid_request, "body needs 'word', 'phonemes' or 'utterance'");
}

json utterance_json(const UtteranceResult& r, const Controller& c) {
    const auto& d = r.decision;
    json j{{"input", r.input.kind == Utterance::Kind::Word ? "word" : "phonemes"},
           {"text", r.input.text},
           {"accepted", d.accepted()},
           {"reason", d.rejection ? json(voice::to_string(*d.rejection)) : json(nullptr)},
           {"match", d.match ? codec::to_json(*d.match) : json(nullptr)},
           {"nearest", d.nearest ? codec::to_json(*d.nearest) : json(nullptr)},
           {"change", r.change ? codec::to_json(*r.change) : json(nullptr)}};
    j["candidates"] = json::array();
    for (const auto& m : r.candidates) j["candidates"].push_back(codec::to_json(m));
    j["appliances"] = c.appliances_json();
    return j;
}

}  // namespace

Service::Service(Config config, Clock& clock)
    : config_(std::move(config)),
      clock_(clock),
      controller_(std::make_unique<Controller>(config_, clock_)),
      server_(std::make_unique<httplib::Server>()) {
    controller_->set_event_listener([this](const Event& e) {
        hub_.publish(StreamHub::frame(to_json(e).dump(), std::nullopt, e.seq));
    });
    server_->new_task_queue = [] { return new httplib::ThreadPool(32); };
    // The library default adds SO_REUSEPORT, which would let a second
    // instance share the port instead of failing to bind.
    server_->set_socket_options([](socket_t sock) {
        int yes = 1;
        setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
    });
    setup_routes();
}

Service::~Service() { stop(); }

RecoveryReport Service::start(const std::string& host, int port) {
    auto report = queue_.call([this] { return controller_->recover(); });
    for (const auto& w : report.warnings) log::warn(w);

    port_ = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
    if (port_ < 0) {
        throw Error(Errc::port_in_use, "cannot listen on " + host + ":" + std::to_string(port));
    }
    listen_thread_ = std::thread([this] { server_->listen_after_bind(); });
    ticker_thread_ = std::thread([this] { ticker_loop(); });
    running_ = true;
    log::info("listening on http://" + host + ":" + std::to_string(port_));
    return report;
}

void Service::stop() {
    if (!running_.exchange(false)) return;
    hub_.close_all();
    server_->stop();
    if (listen_thread_.joinable()) listen_thread_.join();
    {
        std::lock_guard lock(ticker_mutex_);
        ticker_stop_ = true;
    }
    ticker_cv_.notify_all();
    if (ticker_thread_.joinable()) ticker_thread_.join();
    try {
        queue_.call([this] { controller_->save_snapshot(); });
    } catch (const std::exception& e) {
        log::error(std::string("final snapshot failed: ") + e.what());
    }
}

void Service::ticker_loop() {
    using namespace std::chrono;
    auto next_snapshot = steady_clock::now() + config_.snapshot_interval;
    for (;;) {
        {
            std::unique_lock lock(ticker_mutex_);
            if (ticker_cv_.wait_for(lock, seconds{1}, [this] { return ticker_stop_; })) return;
        }
        try {
            queue_.call([this] { controller_->tick(); });
            if (steady_clock::now() >= next_snapshot) {
                queue_.call([this] { controller_->save_snapshot(); });
                next_snapshot = steady_clock::now() + config_.snapshot_interval;
            }
        } catch (const std::exception& e) {
            log::warn(std::string("ticker: ") + e.what());
        }
    }
}

void Service::setup_routes() {
    auto& srv = *server_;

    srv.Get("/api/health", [](const httplib::Request&, httplib::Response& res) {
        send_json(res, json{{"status", "ok"}});
    });

    srv.Get("/api/appliances", [this](const httplib::Request&, httplib::Response& res) {
        guarded(res, [&] {
            send_json(res, call([](Controller& c) {
                return json{{"appliances", c.appliances_json()}, {"master_on", c.master_on()}};
            }));
        });
    });

    srv.Put(R"(/api/appliances/([^/]+)/state)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            auto selector = req.matches[1].str();
            auto state = parse_power_state(require_string(parse_body(req), "state"));
            send_json(res, call([&](Controller& c) {
                auto r = c.set_state(selector, state);
                json out{{"appliance", codec::to_json(r.change.appliance, c.registry().locate(r.change.appliance.channel))},
                         {"port", port::format_address(r.change.port)},
                         {"latch", port::format_byte(r.change.latch)},
                         {"appliances", c.appliances_json()}};
                if (r.warning) out["warning"] = *r.warning;
                return out;
            }));
        });
    });

    srv.Get("/api/timers", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            std::optional<JobStatus> filter;
            if (req.has_param("status")) filter = parse_job_status(req.get_param_value("status"));
            send_json(res, call([&](Controller& c) {
                json list = json::array();
                for (const auto& j : c.timers(filter)) list.push_back(codec::to_json(j));
                return json{{"timers", list}};
            }));
        });
    });

    srv.Post("/api/timers", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            auto body = parse_body(req);
            auto at = body.contains("fire_at") ? require_string(body, "fire_at") : require_string(body, "at");
            if (!body.contains("device")) throw Error(Errc::invalid_request, "field 'device' is required");
            const auto& dev = body.at("device");
            std::string selector;
            if (dev.is_string()) {
                selector = dev.get<std::string>();
            } else if (dev.is_number_integer()) {
                selector = std::to_string(dev.get<int>());
            } else {
                throw Error(Errc::invalid_request, "field 'device' must be a name or channel number");
            }
            auto state = parse_power_state(require_string(body, "state"));
            send_json(res, call([&](Controller& c) {
                return json{{"timer", codec::to_json(c.add_timer(at, selector, state))}};
            }), 201);
        });
    });

    srv.Delete(R"(/api/timers/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            auto id = req.matches[1].str();
            send_json(res, call([&](Controller& c) {
                auto r = c.cancel_timer(id);
                return json{{"timer", codec::to_json(r.job)}, {"changed", r.changed}};
            }));
        });
    });

    srv.Post("/api/utterance", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            auto u = utterance_from_body(parse_body(req));
            send_json(res, call([&](Controller& c) { return utterance_json(c.handle_utterance(u), c); }));
        });
    });

    srv.Get("/api/events", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            std::uint64_t since = 0;
            if (req.has_param("since")) {
                try {
                    since = std::stoull(req.get_param_value("since"));
                } catch (const std::exception&) {
                    throw Error(Errc::invalid_request, "'since' must be a non-negative integer");
                }
            }
            send_json(res, call([&](Controller& c) {
                json list = json::array();
                for (const auto& e : c.events(since)) list.push_back(to_json(e));
                return json{{"events", list}, {"last_seq", c.last_event_seq()}};
            }));
        });
    });

    srv.Get("/api/port", [this](const httplib::Request&, httplib::Response& res) {
        guarded(res, [&] {
            send_json(res, call([](Controller& c) {
                return json{{"ports", c.ports_json()}, {"master_on", c.master_on()}};
            }));
        });
    });

    srv.Put("/api/master", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            auto body = parse_body(req);
            if (!body.contains("on") || !body.at("on").is_boolean()) {
                throw Error(Errc::invalid_request, "field 'on' must be a boolean");
            }
            bool on = body.at("on").get<bool>();
            send_json(res, call([&](Controller& c) {
                c.set_master(on);
                return json{{"master_on", c.master_on()}, {"ports", c.ports_json()}};
            }));
        });
    });

    srv.Get("/api/clock", [this](const httplib::Request&, httplib::Response& res) {
        send_json(res, json{{"now", format_rfc3339(clock_.now(), config_.timezone)},
                            {"mode", clock_.is_virtual() ? "virtual" : "real"}});
    });

    // Virtual clock only: move time forward and tick once.
    srv.Post("/api/clock/advance", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            auto* vclock = dynamic_cast<VirtualClock*>(&clock_);
            if (!vclock) throw Error(Errc::not_supported, "clock is not virtual");
            auto body = parse_body(req);
            send_json(res, call([&](Controller& c) {
                if (body.contains("to")) {
                    vclock->set(parse_datetime(require_string(body, "to"), config_.timezone).instant);
                } else {
                    if (!body.contains("seconds") || !body.at("seconds").is_number_integer()) {
                        throw Error(Errc::invalid_request, "field 'seconds' must be an integer");
                    }
                    vclock->advance(std::chrono::seconds{body.at("seconds").get<std::int64_t>()});
                }
                json resolved = json::array();
                for (const auto& j : c.tick()) resolved.push_back(codec::to_json(j));
                return json{{"now", format_rfc3339(clock_.now(), config_.timezone)}, {"resolved", resolved}};
            }));
        });
    });

    srv.Get("/api/stream", [this](const httplib::Request&, httplib::Response& res) {
        std::shared_ptr<StreamHub::Subscriber> sub;
        try {
            sub = call([this](Controller& c) {
                return hub_.subscribe(StreamHub::frame(c.state_json().dump(), "snapshot", c.last_event_seq()));
            });
        } catch (const std::exception& e) {
            send_error(res, 503, "unavailable", e.what());
            return;
        }
        res.set_header("Cache-Control", "no-cache");
        res.set_chunked_content_provider(
            "text/event-stream",
            [sub](std::size_t, httplib::DataSink& sink) {
                auto frames = sub->wait(std::chrono::seconds{15});
                if (frames.empty()) {
                    if (sub->closed()) {
                        sink.done();
                        return true;
                    }
                    static const std::string keepalive = ": keepalive\n\n";
                    return sink.write(keepalive.data(), keepalive.size());
                }
                for (const auto& f : frames) {
                    if (!sink.write(f.data(), f.size())) return false;
                }
                return true;
            },
            [this, sub](bool) { hub_.unsubscribe(sub); });
    });

    if (config_.ui_dir) {
        if (!srv.set_mount_point("/", config_.ui_dir->string())) {
            log::warn("ui_dir " + config_.ui_dir->string() + " is not a directory; console not served");
        }
    }
}

}  // namespace hearth::service
