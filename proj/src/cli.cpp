#include "hearth/cli.hpp"

#include <atomic>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <thread>

#include "CLI11.hpp"
#include "httplib.h"
#include "json.hpp"

#include "hearth/codec.hpp"
#include "hearth/config.hpp"
#include "hearth/error.hpp"
#include "hearth/interface_box.hpp"
#include "hearth/log.hpp"
#include "hearth/service.hpp"

namespace hearth::cli {

using nlohmann::json;

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop = true; }

struct Endpoint {
    std::string host;
    int port = 0;
};

Endpoint parse_endpoint(std::string addr) {
    if (addr.starts_with("http://")) addr = addr.substr(7);
    while (!addr.empty() && addr.back() == '/') addr.pop_back();
    auto colon = addr.rfind(':');
    if (colon == std::string::npos) throw Error(Errc::invalid_request, "address must be host:port");
    Endpoint ep{addr.substr(0, colon), 0};
    try {
        ep.port = std::stoi(addr.substr(colon + 1));
    } catch (const std::exception&) {
        throw Error(Errc::invalid_request, "bad port in address '" + addr + "'");
    }
    return ep;
}

struct Unreachable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ApiFailure : std::runtime_error {
    ApiFailure(int status, json body, const std::string& message)
        : std::runtime_error(message), status(status), body(std::move(body)) {}
    int status;
    json body;
};

/// Thin HTTP client: one request in flight, JSON in and out.
class Api {
public:
    explicit Api(const Endpoint& ep) : client_(ep.host, ep.port), where_(ep.host + ":" + std::to_string(ep.port)) {
        client_.set_connection_timeout(std::chrono::seconds{3});
        client_.set_read_timeout(std::chrono::seconds{10});
    }

    json get(const std::string& path) { return check(client_.Get(path)); }
    json put(const std::string& path, const json& body) {
        return check(client_.Put(path, body.dump(), "application/json"));
    }
    json post(const std::string& path, const json& body) {
        return check(client_.Post(path, body.dump(), "application/json"));
    }
    json del(const std::string& path) { return check(client_.Delete(path)); }

private:
    json check(const httplib::Result& r) {
        if (!r) {
            throw Unreachable("cannot reach service at " + where_ + ": " + httplib::to_string(r.error()));
        }
        json body;
        try {
            body = json::parse(r->body);
        } catch (const json::parse_error&) {
            body = json{{"raw", r->body}};
        }
        if (r->status >= 400) {
            std::string msg = "HTTP " + std::to_string(r->status);
            if (body.contains("error")) {
                msg = body["error"].value("code", "error") + ": " + body["error"].value("message", "");
            }
            throw ApiFailure(r->status, body, msg);
        }
        return body;
    }

    httplib::Client client_;
    std::string where_;
};

std::string path_segment(const std::string& s) {
    // The client percent-encodes the path itself.
    return s;
}

void print_appliance_line(std::ostream& out, const json& a) {
    out << std::left << std::setw(4) << a.at("channel").get<int>() << std::setw(18)
        << a.at("name").get<std::string>() << std::setw(16) << a.at("kind").get<std::string>()
        << a.at("state").get<std::string>() << '\n';
}

void print_job_line(std::ostream& out, const json& j) {
    out << std::left << std::setw(10) << j.at("id").get<std::string>() << std::setw(10)
        << j.at("status").get<std::string>() << std::setw(27) << j.at("fire_at").get<std::string>()
        << "ch" << j.at("channel").get<int>() << ' ' << j.at("desired").get<std::string>() << '\n';
}

void print_box(std::ostream& out, const std::string& address, const box::BoxState& s) {
    auto bits = [&](auto pred) {
        std::string r;
        for (int i = 0; i < box::kRelayCount; ++i) {
            if (i) r += ' ';
            r += pred(i) ? '1' : '0';
        }
        return r;
    };
    out << address << " latch " << port::format_byte(s.latch) << " master " << (s.master_on ? "on" : "off")
        << '\n';
    out << "  relays  " << bits([&](int i) { return s.relays[i].coil_energized; }) << '\n';
    out << "  sockets " << bits([&](int i) { return s.sockets[i].powered; }) << '\n';
    out << "  leds    " << bits([&](int i) { return s.leds[i].lit; }) << '\n';
}

int serve(const std::optional<std::string>& config_path, const std::optional<int>& http_port,
          const std::optional<std::string>& bind, const std::optional<std::string>& data_dir,
          const std::optional<std::string>& virtual_start, bool virtual_clock, bool quiet,
          std::ostream& err) {
    log::set_quiet(quiet);
    service::Config config;
    try {
        config = config_path ? service::load_config(*config_path) : service::default_config();
        if (http_port) config.http_port = *http_port;
        if (bind) config.bind_address = *bind;
        if (data_dir) config.persistence_dir = *data_dir;
        if (virtual_clock || virtual_start) config.clock_mode = service::ClockMode::Virtual;
        if (virtual_start) config.virtual_start = parse_datetime(*virtual_start, config.timezone).instant;
    } catch (const Error& e) {
        err << "invalid-config: " << e.what() << '\n';
        return kExitInvalidConfig;
    }

    std::unique_ptr<Clock> clock;
    if (config.clock_mode == service::ClockMode::Virtual) {
        clock = std::make_unique<VirtualClock>(config.virtual_start.value_or(SystemClock{}.now()));
    } else {
        clock = std::make_unique<SystemClock>();
    }

    try {
        service::Service svc(config, *clock);
        auto report = svc.start();
        log::info(std::string("recovered ") + (report.from_snapshot ? "from snapshot" : "fresh state") +
                  ", " + std::to_string(report.replayed_events) + " log events replayed, " +
                  std::to_string(report.resolved.size()) + " overdue jobs resolved");
        g_stop = false;
        std::signal(SIGINT, on_signal);
        std::signal(SIGTERM, on_signal);
        while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds{100});
        log::info("shutting down");
        svc.stop();
    } catch (const Error& e) {
        err << errc_name(e.code()) << ": " << e.what() << '\n';
        switch (e.code()) {
            case Errc::invalid_config:
            case Errc::parse_error:
            case Errc::unknown_phoneme:
            case Errc::unknown_port:
                return kExitInvalidConfig;
            case Errc::persistence_io:
            case Errc::corrupt_snapshot:
                return kExitPersistence;
            default:
                return kExitApiError;
        }
    }
    return kExitOk;
}

int trace_replay(const std::string& file, bool as_json, std::ostream& out, std::ostream& err) {
    std::ifstream in(file);
    if (!in) {
        err << "cannot open trace " << file << '\n';
        return kExitApiError;
    }
    try {
        auto records = port::read_trace(in);
        auto states = box::replay_trace(records);
        if (as_json) {
            json ports = json::array();
            for (const auto& [addr, s] : states) {
                ports.push_back({{"address", port::format_address(addr)}, {"box", codec::to_json(s)}});
            }
            out << json{{"records", records.size()}, {"ports", ports}}.dump(2) << '\n';
        } else {
            out << records.size() << " writes replayed\n";
            for (const auto& [addr, s] : states) print_box(out, port::format_address(addr), s);
        }
    } catch (const Error& e) {
        err << errc_name(e.code()) << ": " << e.what() << '\n';
        return kExitApiError;
    }
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Smart-home appliance controller: service launcher and client"};
    app.require_subcommand(1, 1);
    app.fallthrough();

    std::string addr;
    if (const char* env = std::getenv(kAddrEnv); env && *env) {
        addr = env;
    } else {
        addr = kDefaultAddr;
    }
    bool as_json = false;
    app.add_option("--addr", addr, "Service address host:port (env HEARTHCTL_ADDR)")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.add_flag("--json", as_json, "Machine-readable output");

    // serve
    auto* serve_cmd = app.add_subcommand("serve", "Run the control service");
    std::optional<std::string> config_path, bind, data_dir, virtual_start;
    std::optional<int> http_port;
    bool virtual_clock = false, quiet = false;
    serve_cmd->add_option("--config", config_path, "Config file (JSON)");
    serve_cmd->add_option("--port", http_port, "HTTP port (0 = any)");
    serve_cmd->add_option("--bind", bind, "Bind address");
    serve_cmd->add_option("--data-dir", data_dir, "Persistence directory");
    serve_cmd->add_flag("--virtual-clock", virtual_clock, "Use a manually advanced clock");
    serve_cmd->add_option("--virtual-start", virtual_start, "Virtual clock start (RFC 3339)");
    serve_cmd->add_flag("--quiet", quiet, "Only log errors");

    auto* status_cmd = app.add_subcommand("status", "Show appliances and port latches");

    std::string selector;
    auto* on_cmd = app.add_subcommand("on", "Turn an appliance on");
    on_cmd->add_option("selector", selector, "Appliance name or channel")->required();
    auto* off_cmd = app.add_subcommand("off", "Turn an appliance off");
    off_cmd->add_option("selector", selector, "Appliance name or channel")->required();

    std::string master_state;
    auto* master_cmd = app.add_subcommand("master", "Switch the interface box mains on/off");
    master_cmd->add_option("state", master_state, "on|off")->required()->check(CLI::IsMember({"on", "off"}));

    std::string at, device, timer_state;
    auto* tadd_cmd = app.add_subcommand("timer-add", "Schedule a one-shot state change");
    tadd_cmd->add_option("--at", at, "RFC 3339 date-time")->required();
    tadd_cmd->add_option("--device", device, "Appliance name or channel")->required();
    tadd_cmd->add_option("--state", timer_state, "on|off")->required()->check(CLI::IsMember({"on", "off"}));

    std::optional<std::string> status_filter;
    auto* tls_cmd = app.add_subcommand("timer-ls", "List timer jobs");
    tls_cmd->add_option("--status", status_filter, "pending|fired|missed|cancelled")
        ->check(CLI::IsMember({"pending", "fired", "missed", "cancelled"}));

    std::string job_id;
    auto* trm_cmd = app.add_subcommand("timer-rm", "Cancel a timer job");
    trm_cmd->add_option("id", job_id, "Job id")->required();

    std::string utterance;
    auto* say_cmd = app.add_subcommand("say", "Voice command: word:<W> or ph:<symbols>");
    say_cmd->add_option("utterance", utterance, "word:<W> | ph:<symbols>")->required();

    std::uint64_t since = 0;
    auto* events_cmd = app.add_subcommand("events", "Print the event log");
    events_cmd->add_option("--since", since, "Only events after this sequence number");

    std::string trace_file;
    auto* replay_cmd = app.add_subcommand("trace-replay", "Replay a port trace on a fresh simulator");
    replay_cmd->add_option("file", trace_file, "Trace file")->required()->check(CLI::ExistingFile);

    std::vector<std::string> rev(args.rbegin(), args.rend());
    if (!rev.empty()) rev.pop_back();
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n' << "run with --help for usage\n";
        return kExitUsage;
    }

    if (serve_cmd->parsed()) {
        return serve(config_path, http_port, bind, data_dir, virtual_start, virtual_clock, quiet, err);
    }
    if (replay_cmd->parsed()) return trace_replay(trace_file, as_json, out, err);

    Endpoint ep;
    try {
        ep = parse_endpoint(addr);
    } catch (const Error& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    }

    Api api(ep);
    try {
        if (status_cmd->parsed()) {
            auto apps = api.get("/api/appliances");
            auto ports = api.get("/api/port");
            if (as_json) {
                out << json{{"appliances", apps.at("appliances")},
                            {"master_on", apps.at("master_on")},
                            {"ports", ports.at("ports")}}
                           .dump(2)
                    << '\n';
            } else {
                for (const auto& a : apps.at("appliances")) print_appliance_line(out, a);
                for (const auto& p : ports.at("ports")) {
                    out << "port " << p.at("address").get<std::string>() << " latch "
                        << p.at("latch").get<std::string>() << '\n';
                }
                out << "master " << (apps.at("master_on").get<bool>() ? "on" : "off") << '\n';
            }
        } else if (on_cmd->parsed() || off_cmd->parsed()) {
            auto state = on_cmd->parsed() ? "on" : "off";
            auto r = api.put("/api/appliances/" + path_segment(selector) + "/state", json{{"state", state}});
            if (r.contains("warning")) err << "warning: " << r.at("warning").get<std::string>() << '\n';
            if (as_json) {
                out << r.dump(2) << '\n';
            } else {
                const auto& a = r.at("appliance");
                out << a.at("name").get<std::string>() << " " << a.at("state").get<std::string>() << " (port "
                    << r.at("port").get<std::string>() << " latch " << r.at("latch").get<std::string>() << ")\n";
            }
        } else if (master_cmd->parsed()) {
            auto r = api.put("/api/master", json{{"on", master_state == "on"}});
            if (as_json) {
                out << r.dump(2) << '\n';
            } else {
                out << "master " << (r.at("master_on").get<bool>() ? "on" : "off") << '\n';
            }
        } else if (tadd_cmd->parsed()) {
            auto r = api.post("/api/timers", json{{"fire_at", at}, {"device", device}, {"state", timer_state}});
            if (as_json) {
                out << r.dump(2) << '\n';
            } else {
                print_job_line(out, r.at("timer"));
            }
        } else if (tls_cmd->parsed()) {
            auto r = api.get(status_filter ? "/api/timers?status=" + *status_filter : "/api/timers");
            if (as_json) {
                out << r.dump(2) << '\n';
            } else {
                for (const auto& j : r.at("timers")) print_job_line(out, j);
            }
        } else if (trm_cmd->parsed()) {
            auto r = api.del("/api/timers/" + path_segment(job_id));
            if (as_json) {
                out << r.dump(2) << '\n';
            } else {
                const auto& j = r.at("timer");
                out << j.at("id").get<std::string>() << ' ' << j.at("status").get<std::string>()
                    << (r.at("changed").get<bool>() ? "" : " (unchanged)") << '\n';
            }
        } else if (say_cmd->parsed()) {
            service::Utterance u;
            try {
                u = service::parse_utterance(utterance);
            } catch (const Error& e) {
                err << "usage error: " << e.what() << '\n';
                return kExitUsage;
            }
            json body = u.kind == service::Utterance::Kind::Word ? json{{"word", u.text}}
                                                                 : json{{"phonemes", u.text}};
            auto r = api.post("/api/utterance", body);
            if (as_json) {
                out << r.dump(2) << '\n';
            } else if (r.at("accepted").get<bool>()) {
                const auto& m = r.at("match");
                const auto& c = r.at("change");
                out << "recognized " << m.at("word").get<std::string>() << " (distance "
                    << m.at("distance").get<int>() << ", confidence " << std::fixed << std::setprecision(2)
                    << m.at("confidence").get<double>() << ") -> " << c.at("name").get<std::string>() << ' '
                    << c.at("state").get<std::string>() << '\n';
            } else {
                out << "rejected: " << r.at("reason").get<std::string>();
                const auto& n = r.at("nearest").is_null() ? r.at("match") : r.at("nearest");
                if (!n.is_null()) {
                    out << " (nearest " << n.at("word").get<std::string>() << ", confidence " << std::fixed
                        << std::setprecision(2) << n.at("confidence").get<double>() << ")";
                }
                out << '\n';
            }
        } else if (events_cmd->parsed()) {
            auto r = api.get("/api/events?since=" + std::to_string(since));
            if (as_json) {
                out << r.dump(2) << '\n';
            } else {
                for (const auto& e : r.at("events")) {
                    out << e.at("seq").get<std::uint64_t>() << ' ' << e.at("ts").get<std::string>() << ' '
                        << e.at("kind").get<std::string>() << ' ' << e.at("source").get<std::string>() << ' '
                        << e.at("payload").dump() << '\n';
                }
            }
        }
    } catch (const Unreachable& e) {
        err << e.what() << '\n';
        return kExitUnreachable;
    } catch (const ApiFailure& e) {
        err << e.what() << '\n';
        if (as_json) out << e.body.dump(2) << '\n';
        return kExitApiError;
    } catch (const json::exception& e) {
        err << "unexpected response: " << e.what() << '\n';
        return kExitApiError;
    }
    return kExitOk;
}

}  // namespace hearth::cli
