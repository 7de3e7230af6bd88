#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "hearth/appliance_registry.hpp"
#include "hearth/clock.hpp"
#include "hearth/config.hpp"
#include "hearth/event_log.hpp"
#include "hearth/interface_box.hpp"
#include "hearth/port_model.hpp"
#include "hearth/timer_scheduler.hpp"
#include "hearth/voice_command.hpp"

namespace hearth::service {

inline constexpr int kSnapshotSchemaVersion = 1;

struct Utterance {
    enum class Kind { Word, Phonemes };
    Kind kind = Kind::Word;
    std::string text;
};

/// "word:<token>" or "ph:<symbols>". Throws Errc::invalid_request.
Utterance parse_utterance(std::string_view text);

struct ManualResult {
    StateChange change;
    std::optional<std::string> warning;
};

struct UtteranceResult {
    Utterance input;
    voice::Decision decision;
    std::vector<voice::CommandMatch> candidates;
    std::optional<StateChange> change;
};

struct PortStatus {
    port::PortAddress address;
    port::DataByte latch;
    box::BoxState box;
};

struct RecoveryReport {
    bool from_snapshot = false;
    std::size_t replayed_events = 0;
    std::vector<TimerJob> resolved;
    std::vector<std::string> warnings;
};

/// The control unit's state authority. Owns the port bank, the simulated
/// boxes, the registry, the scheduler, the lexicon and the event log.
///
/// Not thread-safe: callers serialize every call (see Service).
class Controller {
public:
    /// Throws Errc::invalid_config, Errc::persistence_io or lexicon errors.
    Controller(Config config, Clock& clock);

    const Config& config() const { return config_; }
    Clock& clock() { return clock_; }

    /// Startup only: snapshot + event-log suffix, latches rewritten, overdue
    /// jobs resolved by the grace rule, fresh snapshot written.
    /// Throws Errc::corrupt_snapshot.
    RecoveryReport recover();

    ManualResult set_state(std::string_view selector, PowerState s);
    void set_master(bool on);
    bool master_on() const { return master_on_; }

    const TimerJob& add_timer(std::string_view fire_at, std::string_view selector, PowerState desired);
    const TimerJob& add_timer(ZonedTime fire_at, int channel, PowerState desired);
    CancelResult cancel_timer(std::string_view id);
    std::vector<TimerJob> timers(std::optional<JobStatus> filter = std::nullopt) const;

    UtteranceResult handle_utterance(const Utterance& u);

    std::vector<TimerJob> tick();
    std::vector<TimerJob> tick(Instant now);

    std::vector<Appliance> appliances() const { return registry_.states(); }
    const ApplianceRegistry& registry() const { return registry_; }
    std::vector<PortStatus> ports() const;
    const voice::Lexicon& lexicon() const { return *lexicon_; }
    std::set<std::string> grammar() const;

    std::vector<Event> events(std::uint64_t since) const { return log_.since(since); }
    std::uint64_t last_event_seq() const { return log_.last_seq(); }

    nlohmann::json snapshot_json() const;
    /// No-op without a persistence directory. Throws Errc::persistence_io.
    void save_snapshot();
    std::optional<std::filesystem::path> snapshot_path() const;
    std::optional<std::filesystem::path> event_log_path() const;

    /// Full observable state, used for the stream's initial message.
    nlohmann::json state_json() const;
    nlohmann::json appliances_json() const;
    nlohmann::json ports_json() const;

    /// Called after each appended event.
    void set_event_listener(std::function<void(const Event&)> listener) {
        listener_ = std::move(listener);
    }

private:
    const Event& emit(EventKind kind, Source source, nlohmann::json payload);
    void record_change(const StateChange& change);
    void restore_snapshot(const nlohmann::json& snap, RecoveryReport& report);
    void replay_event(const Event& e, RecoveryReport& report);

    Config config_;
    Clock& clock_;
    std::optional<std::filesystem::path> dir_;
    std::unique_ptr<std::ofstream> trace_out_;
    box::SimulatorBackend backend_;
    port::PortBank bank_;
    ApplianceRegistry registry_;
    TimerScheduler scheduler_;
    std::unique_ptr<voice::Lexicon> lexicon_;
    EventLog log_;
    bool master_on_ = true;
    std::function<void(const Event&)> listener_;
};

}  // namespace hearth::service
