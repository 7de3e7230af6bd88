#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "oracles.hpp"

#include "hearth/controller.hpp"
#include "hearth/error.hpp"

using namespace hearth;
using namespace hearth::service;
using namespace std::chrono_literals;
namespace fs = std::filesystem;

namespace {

const Instant kT0 = from_unix_millis(1'767'225'600'000);  // 2026-01-01T00:00:00Z

struct TempDir {
    explicit TempDir(const std::string& tag)
        : path(fs::temp_directory_path() / ("hearth_ctl_" + tag + "_" + std::to_string(::getpid()))) {
        fs::remove_all(path);
    }
    ~TempDir() { fs::remove_all(path); }
    fs::path path;
};

Config test_config(std::optional<fs::path> dir = std::nullopt) {
    auto c = default_config();
    c.box.switch_delay = 0ms;
    c.persistence_dir = std::move(dir);
    return c;
}

std::map<int, bool> on_map(const Controller& c) {
    std::map<int, bool> m;
    for (const auto& a : c.appliances()) m[a.channel] = a.state == PowerState::On;
    return m;
}

void check_consistent(const Controller& c) {
    const auto ports = c.ports();
    auto expect = oracle::fold_latches(on_map(c), ports.size());
    for (std::size_t i = 0; i < ports.size(); ++i) {
        const auto& p = ports[i];
        REQUIRE(p.latch.value == expect[i]);
        REQUIRE(p.box.latch.value == expect[i]);
        for (int bit = 0; bit < 8; ++bit) {
            bool on = (expect[i] >> bit) & 1;
            REQUIRE(p.box.sockets[bit].powered == (on && p.box.master_on));
        }
    }
}

std::vector<EventKind> kinds(const std::vector<Event>& events) {
    std::vector<EventKind> out;
    for (const auto& e : events) out.push_back(e.kind);
    return out;
}

}  // namespace

TEST_CASE("manual switching emits attributed state changes") {
    VirtualClock clock(kT0);
    Controller c(test_config(), clock);
    auto r = c.set_state("fan", PowerState::On);
    CHECK(r.change.appliance.name == "Fan");
    CHECK(r.change.latch.value == 0x02);
    c.set_state("5", PowerState::On);
    check_consistent(c);
    auto ev = c.events(0);
    REQUIRE(ev.size() == 2);
    CHECK(ev[0].kind == EventKind::StateChanged);
    CHECK(ev[0].source == Source::Manual);
    CHECK(ev[1].payload.at("latch") == "0x22");
    CHECK_THROWS_AS(c.set_state("Toaster", PowerState::On), Error);
    CHECK(c.last_event_seq() == 2);
}

TEST_CASE("master switch kills sockets but keeps the latch") {
    VirtualClock clock(kT0);
    Controller c(test_config(), clock);
    c.set_state("Light", PowerState::On);
    c.set_master(false);
    CHECK_FALSE(c.master_on());
    CHECK(c.ports()[0].latch.value == 0x01);
    CHECK(c.ports()[0].box.powered_count() == 0);
    check_consistent(c);
    c.set_master(true);
    CHECK(c.ports()[0].box.powered_count() == 1);
    CHECK(c.events(0).back().kind == EventKind::MasterSwitched);
}

TEST_CASE("timers fire through the registry with timer attribution") {
    VirtualClock clock(kT0);
    Controller c(test_config(), clock);
    auto id = c.add_timer("2026-01-01T00:00:10Z", "Heater", PowerState::On).id;
    c.add_timer("2026-01-01T00:00:05Z", "Motor", PowerState::On);
    c.tick(kT0 + 5s);
    CHECK(c.appliances()[4].state == PowerState::On);
    CHECK(c.appliances()[2].state == PowerState::Off);
    c.tick(kT0 + 11s);
    CHECK(c.appliances()[2].state == PowerState::On);
    check_consistent(c);
    auto ev = c.events(2);
    CHECK(kinds(ev) == std::vector<EventKind>{EventKind::TimerFired, EventKind::StateChanged,
                                              EventKind::TimerFired, EventKind::StateChanged});
    CHECK(ev[1].source == Source::Timer);
    CHECK(ev[2].payload.at("job").at("id") == id);
}

TEST_CASE("a job beyond grace is missed and changes nothing") {
    VirtualClock clock(kT0);
    Controller c(test_config(), clock);
    c.add_timer(ZonedTime{kT0 + 1s, {}}, 0, PowerState::On);
    c.tick(kT0 + 62s);
    CHECK(c.appliances()[0].state == PowerState::Off);
    CHECK(c.events(0).back().kind == EventKind::TimerMissed);
    CHECK(c.timers(JobStatus::Missed).size() == 1);
}

TEST_CASE("naive timer text uses the configured zone") {
    VirtualClock clock(kT0);
    auto cfg = test_config();
    cfg.timezone = UtcOffset{60};
    Controller c(cfg, clock);
    const auto& j = c.add_timer("2026-01-01T01:00:00", "Light", PowerState::On);
    CHECK(j.fire_at.instant == kT0);
    CHECK(j.fire_at.offset == UtcOffset{60});
}

TEST_CASE("word utterances") {
    VirtualClock clock(kT0);
    Controller c(test_config(), clock);
    auto ok = c.handle_utterance(parse_utterance("word:LightOn"));
    REQUIRE(ok.decision.accepted());
    REQUIRE(ok.change);
    CHECK(ok.change->source == Source::Voice);
    CHECK(c.appliances()[0].state == PowerState::On);

    auto unknown = c.handle_utterance(parse_utterance("word:Banana"));
    CHECK_FALSE(unknown.decision.accepted());
    CHECK(unknown.decision.rejection == voice::RejectReason::UnknownWord);

    auto homophone = c.handle_utterance(parse_utterance("word:write"));
    CHECK(homophone.decision.rejection == voice::RejectReason::NotACommand);

    auto ev = c.events(0);
    CHECK(kinds(ev) == std::vector<EventKind>{EventKind::CommandRecognized, EventKind::StateChanged,
                                              EventKind::CommandRejected, EventKind::CommandRejected});
    CHECK(ev[2].payload.at("reason") == "unknown-word");
}

TEST_CASE("phoneme utterances") {
    VirtualClock clock(kT0);
    Controller c(test_config(), clock);
    auto ok = c.handle_utterance(parse_utterance("ph:T IY V IY AA N"));
    REQUIRE(ok.decision.accepted());
    CHECK(ok.decision.match->word == "TVOn");
    CHECK(ok.candidates.size() == 5);
    CHECK(c.appliances()[5].state == PowerState::On);

    auto weak = c.handle_utterance(parse_utterance("ph:ZH OY"));
    CHECK(weak.decision.rejection == voice::RejectReason::LowConfidence);
    CHECK_FALSE(weak.change);

    CHECK_THROWS_AS(c.handle_utterance(parse_utterance("ph:ZZ")), Error);
    CHECK_THROWS_AS(parse_utterance("LightOn"), Error);
}

TEST_CASE("commands for unregistered channels are out of grammar") {
    VirtualClock clock(kT0);
    auto cfg = test_config();
    cfg.appliances = {{0, "Light", "light"}};
    Controller c(cfg, clock);
    CHECK(c.grammar() == std::set<std::string>{"LightOff", "LightOn"});
    auto r = c.handle_utterance(parse_utterance("word:FanOn"));
    CHECK(r.decision.rejection == voice::RejectReason::OutOfGrammar);
    auto p = c.handle_utterance(parse_utterance("ph:F AE N AA N"));
    CHECK(p.decision.rejection == voice::RejectReason::OutOfGrammar);
}

TEST_CASE("bad appliance config is reported as invalid config") {
    VirtualClock clock(kT0);
    auto cfg = test_config();
    cfg.appliances = {{0, "A", ""}, {0, "B", ""}};
    try {
        Controller c(cfg, clock);
        FAIL("accepted");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::invalid_config);
    }
}

TEST_CASE("crash recovery restores states and fires a due job once") {
    TempDir dir("crash");
    VirtualClock clock(kT0);
    {
        Controller c(test_config(dir.path), clock);
        c.recover();
        for (const char* n : {"Light", "Heater", "TV"}) c.set_state(n, PowerState::On);
        c.add_timer(ZonedTime{kT0 + 30s, {}}, 1, PowerState::On);   // due during downtime
        c.add_timer(ZonedTime{kT0 + 1h, {}}, 4, PowerState::On);    // still in the future
        c.save_snapshot();
        // dropped without a shutdown snapshot
    }
    clock.set(kT0 + 70s);  // 40 s late, inside the 60 s grace

    Controller c(test_config(dir.path), clock);
    auto report = c.recover();
    CHECK(report.from_snapshot);
    REQUIRE(report.resolved.size() == 1);
    CHECK(report.resolved[0].status == JobStatus::Fired);
    auto on = on_map(c);
    CHECK(on[0]);
    CHECK(on[1]);
    CHECK(on[2]);
    CHECK(on[5]);
    CHECK_FALSE(on[4]);
    check_consistent(c);
    CHECK(c.ports()[0].latch.value == 0x27);

    std::size_t fired = 0;
    for (const auto& e : c.events(0)) fired += e.kind == EventKind::TimerFired;
    CHECK(fired == 1);
    CHECK(c.timers(JobStatus::Pending).size() == 1);

    // a second restart must not fire it again
    Controller again(test_config(dir.path), clock);
    auto second = again.recover();
    CHECK(second.resolved.empty());
    CHECK(on_map(again) == on);
    std::size_t fired_again = 0;
    for (const auto& e : again.events(0)) fired_again += e.kind == EventKind::TimerFired;
    CHECK(fired_again == 1);
}

TEST_CASE("recovery replays events logged after the last snapshot") {
    TempDir dir("suffix");
    VirtualClock clock(kT0);
    {
        Controller c(test_config(dir.path), clock);
        c.recover();
        c.set_state("Fan", PowerState::On);
        c.save_snapshot();
        c.set_state("Motor", PowerState::On);
        c.set_state("Fan", PowerState::Off);
        c.set_master(false);
    }
    Controller c(test_config(dir.path), clock);
    auto report = c.recover();
    CHECK(report.replayed_events == 3);
    auto on = on_map(c);
    CHECK_FALSE(on[1]);
    CHECK(on[4]);
    CHECK_FALSE(c.master_on());
    check_consistent(c);
    CHECK(c.set_state("Light", PowerState::On).change.latch.value == 0x11);
    CHECK(c.last_event_seq() == 5);
}

TEST_CASE("recovery without a snapshot rebuilds from the log alone") {
    TempDir dir("logonly");
    VirtualClock clock(kT0);
    {
        Controller c(test_config(dir.path), clock);
        c.set_state("TV", PowerState::On);
        c.add_timer(ZonedTime{kT0 + 10s, {}}, 6, PowerState::On);
        c.tick(kT0 + 10s);
    }
    fs::remove(dir.path / "snapshot.json");
    clock.set(kT0 + 20s);
    Controller c(test_config(dir.path), clock);
    auto report = c.recover();
    CHECK_FALSE(report.from_snapshot);
    CHECK(report.resolved.empty());
    auto on = on_map(c);
    CHECK(on[5]);
    CHECK(on[6]);
    CHECK(c.timers(JobStatus::Fired).size() == 1);
}

TEST_CASE("a job overdue beyond grace at restart is missed") {
    TempDir dir("missed");
    VirtualClock clock(kT0);
    {
        Controller c(test_config(dir.path), clock);
        c.recover();
        c.add_timer(ZonedTime{kT0 + 10s, {}}, 0, PowerState::On);
    }
    clock.set(kT0 + 10min);
    Controller c(test_config(dir.path), clock);
    auto report = c.recover();
    REQUIRE(report.resolved.size() == 1);
    CHECK(report.resolved[0].status == JobStatus::Missed);
    CHECK_FALSE(on_map(c)[0]);
}

TEST_CASE("corrupt snapshot is refused") {
    TempDir dir("corrupt");
    fs::create_directories(dir.path);
    std::ofstream(dir.path / "snapshot.json") << "{ not json";
    VirtualClock clock(kT0);
    Controller c(test_config(dir.path), clock);
    try {
        c.recover();
        FAIL("accepted");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::corrupt_snapshot);
        CHECK(std::string(e.what()).find("snapshot.json") != std::string::npos);
    }
}

TEST_CASE("snapshot contents") {
    TempDir dir("snap");
    VirtualClock clock(kT0);
    Controller c(test_config(dir.path), clock);
    c.set_state("Light", PowerState::On);
    c.add_timer(ZonedTime{kT0 + 1h, {}}, 2, PowerState::Off);
    auto snap = c.snapshot_json();
    CHECK(snap.at("schema_version") == 1);
    CHECK(snap.at("last_event_seq") == 2);
    CHECK(snap.at("pending_jobs").size() == 1);
    CHECK(snap.at("port_latches").at("0x0378") == "0x01");
    CHECK(snap.at("appliances").size() == 8);
    // timer CRUD writes the snapshot straight away
    REQUIRE(fs::exists(dir.path / "snapshot.json"));
    std::ifstream in(dir.path / "snapshot.json");
    CHECK(nlohmann::json::parse(in).at("pending_jobs").size() == 1);
}

TEST_CASE("trace file records every port write") {
    TempDir dir("trace");
    fs::create_directories(dir.path);
    VirtualClock clock(kT0);
    auto cfg = test_config();
    cfg.trace_file = dir.path / "port.trace";
    {
        Controller c(cfg, clock);
        c.set_state("Light", PowerState::On);
        c.set_state("Fan", PowerState::On);
    }
    std::ifstream in(dir.path / "port.trace");
    auto recs = port::read_trace(in);
    REQUIRE(recs.size() == 2);
    CHECK(recs[1].value.value == 0x03);
    CHECK(recs[0].unix_millis == to_unix_millis(kT0));
}

TEST_CASE("listener sees every event in order") {
    VirtualClock clock(kT0);
    Controller c(test_config(), clock);
    std::vector<std::uint64_t> seen;
    c.set_event_listener([&](const Event& e) { seen.push_back(e.seq); });
    c.set_state("Light", PowerState::On);
    c.handle_utterance(parse_utterance("word:LightOff"));
    CHECK(seen == std::vector<std::uint64_t>{1, 2, 3});
}
