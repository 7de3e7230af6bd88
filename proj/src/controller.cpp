#include "hearth/controller.hpp"

#include <algorithm>
#include <cctype>

#include "hearth/codec.hpp"
#include "hearth/error.hpp"

namespace hearth::service {

using nlohmann::json;

namespace {

constexpr const char* kSnapshotFile = "snapshot.json";
constexpr const char* kEventLogFile = "events.jsonl";
constexpr std::size_t kCandidateCount = 5;

std::optional<std::filesystem::path> prepare_dir(const std::optional<std::filesystem::path>& dir) {
    if (!dir) return std::nullopt;
    std::error_code ec;
    std::filesystem::create_directories(*dir, ec);
    if (ec || !std::filesystem::is_directory(*dir)) {
        throw Error(Errc::persistence_io, "cannot create persistence directory " + dir->string() +
                                              (ec ? ": " + ec.message() : ""));
    }
    return dir;
}

std::optional<std::filesystem::path> log_file(const std::optional<std::filesystem::path>& dir) {
    if (!dir) return std::nullopt;
    return *dir / kEventLogFile;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

}  // namespace

Utterance parse_utterance(std::string_view text) {
    text = trim(text);
    if (text.starts_with("word:")) return Utterance{Utterance::Kind::Word, std::string(trim(text.substr(5)))};
    if (text.starts_with("ph:")) return Utterance{Utterance::Kind::Phonemes, std::string(trim(text.substr(3)))};
    throw Error(Errc::invalid_request, "utterance must be 'word:<token>' or 'ph:<symbols>'");
}

Controller::Controller(Config config, Clock& clock)
    : config_(std::move(config)),
      clock_(clock),
      dir_(prepare_dir(config_.persistence_dir)),
      backend_(config_.ports, config_.box, clock_),
      bank_(config_.ports, backend_),
      registry_(bank_),
      scheduler_(config_.grace_window, [this](int ch) { return registry_.has_channel(ch); }),
      log_(log_file(dir_)) {
    if (config_.trace_file) {
        trace_out_ = std::make_unique<std::ofstream>(*config_.trace_file, std::ios::app);
        if (!*trace_out_) {
            throw Error(Errc::persistence_io, "cannot open trace file " + config_.trace_file->string());
        }
        backend_.set_trace_sink([out = trace_out_.get()](const port::TraceRecord& r) {
            *out << port::format_trace_record(r) << '\n';
            out->flush();
        });
    }

    lexicon_ = std::make_unique<voice::Lexicon>(
        config_.lexicon_path ? voice::Lexicon::load(*config_.lexicon_path) : voice::Lexicon::builtin());

    for (const auto& spec : config_.appliances) {
        try {
            registry_.register_appliance(spec.channel, spec.name, spec.kind);
        } catch (const Error& e) {
            throw Error(Errc::invalid_config, "appliances: " + std::string(e.what()));
        }
    }
}

const Event& Controller::emit(EventKind kind, Source source, json payload) {
    const auto& e = log_.append(clock_.now(), kind, source, std::move(payload));
    if (listener_) listener_(e);
    return e;
}

void Controller::record_change(const StateChange& change) {
    emit(EventKind::StateChanged, change.source, codec::to_json(change));
}

ManualResult Controller::set_state(std::string_view selector, PowerState s) {
    auto match = registry_.resolve(selector);
    auto change = registry_.set_state(match.channel, s, Source::Manual);
    record_change(change);
    return ManualResult{change, match.warning};
}

void Controller::set_master(bool on) {
    backend_.set_master(on);
    master_on_ = on;
    emit(EventKind::MasterSwitched, Source::Manual, json{{"on", on}});
}

const TimerJob& Controller::add_timer(std::string_view fire_at, std::string_view selector,
                                      PowerState desired) {
    auto channel = registry_.resolve(selector).channel;
    return add_timer(parse_datetime(fire_at, config_.timezone), channel, desired);
}

const TimerJob& Controller::add_timer(ZonedTime fire_at, int channel, PowerState desired) {
    const auto& job = scheduler_.add_job(fire_at, channel, desired);
    emit(EventKind::TimerAdded, Source::Manual, json{{"job", codec::to_json(job)}});
    save_snapshot();
    return job;
}

CancelResult Controller::cancel_timer(std::string_view id) {
    auto result = scheduler_.cancel_job(id);
    if (result.changed) {
        emit(EventKind::TimerCancelled, Source::Manual, json{{"job", codec::to_json(result.job)}});
        save_snapshot();
    }
    return result;
}

std::vector<TimerJob> Controller::timers(std::optional<JobStatus> filter) const {
    return scheduler_.list_jobs(filter);
}

std::vector<TimerJob> Controller::tick() { return tick(clock_.now()); }

std::vector<TimerJob> Controller::tick(Instant now) {
    return scheduler_.tick(now, [this](const TimerJob& job) {
        json payload{{"job", codec::to_json(job)}};
        if (job.status == JobStatus::Missed) {
            emit(EventKind::TimerMissed, Source::Timer, std::move(payload));
            return;
        }
        if (!registry_.has_channel(job.channel)) {
            payload["skipped"] = "no appliance on channel";
            emit(EventKind::TimerFired, Source::Timer, std::move(payload));
            return;
        }
        emit(EventKind::TimerFired, Source::Timer, std::move(payload));
        record_change(registry_.set_state(job.channel, job.desired, Source::Timer));
    });
}

std::set<std::string> Controller::grammar() const {
    std::set<std::string> words;
    for (const auto& e : lexicon_->entries()) {
        if (e.binding && registry_.has_channel(e.binding->channel)) words.insert(e.word);
    }
    return words;
}

UtteranceResult Controller::handle_utterance(const Utterance& u) {
    UtteranceResult r;
    r.input = u;
    const bool by_word = u.kind == Utterance::Kind::Word;

    if (by_word) {
        const auto* entry = lexicon_->find(u.text);
        if (!entry) {
            r.decision.rejection = voice::RejectReason::UnknownWord;
        } else {
            voice::CommandMatch m{entry->word, 0, 1.0, false, entry->binding};
            r.candidates = {m};
            if (!entry->binding) {
                r.decision.match = m;
                r.decision.rejection = voice::RejectReason::NotACommand;
            } else if (!grammar().contains(entry->word)) {
                r.decision.nearest = m;
                r.decision.rejection = voice::RejectReason::OutOfGrammar;
            } else {
                m.accepted = true;
                m.binding = voice::interpret_word(entry->word, *lexicon_);
                r.decision.match = m;
            }
        }
    } else {
        auto phonemes = voice::parse_phonemes(u.text);
        auto ranked = voice::recognize(phonemes, *lexicon_);
        r.decision = voice::disambiguate(ranked, grammar(), config_.threshold);
        ranked.resize(std::min(ranked.size(), kCandidateCount));
        r.candidates = std::move(ranked);
    }

    const char* input = by_word ? "word" : "phonemes";
    if (r.decision.accepted()) {
        const auto& m = *r.decision.match;
        emit(EventKind::CommandRecognized, Source::Voice,
             json{{"input", input}, {"text", u.text}, {"match", codec::to_json(m)}});
        r.change = voice::execute(*m.binding, registry_);
        record_change(*r.change);
    } else {
        json payload{{"input", input},
                     {"text", u.text},
                     {"reason", voice::to_string(*r.decision.rejection)}};
        const auto& shown = r.decision.match ? r.decision.match : r.decision.nearest;
        payload["nearest"] = shown ? codec::to_json(*shown) : json(nullptr);
        emit(EventKind::CommandRejected, Source::Voice, std::move(payload));
    }
    return r;
}

std::vector<PortStatus> Controller::ports() const {
    std::vector<PortStatus> out;
    for (auto addr : bank_.addresses()) {
        out.push_back(PortStatus{addr, bank_.read_byte(addr), backend_.box_state(addr)});
    }
    return out;
}

json Controller::appliances_json() const {
    json list = json::array();
    for (const auto& a : registry_.states()) {
        list.push_back(codec::to_json(a, registry_.locate(a.channel)));
    }
    return list;
}

json Controller::ports_json() const {
    json list = json::array();
    for (const auto& p : ports()) {
        json pins = json::array();
        for (int i = 0; i < port::kDataLines; ++i) {
            pins.push_back(port::pin_level(p.latch, i) == port::PinLevel::High ? "high" : "low");
        }
        list.push_back({{"address", port::format_address(p.address)},
                        {"latch", port::format_byte(p.latch)},
                        {"pins", pins},
                        {"box", codec::to_json(p.box)}});
    }
    return list;
}

json Controller::state_json() const {
    json timers = json::array();
    for (const auto& j : scheduler_.list_jobs()) timers.push_back(codec::to_json(j));
    return json{{"now", format_rfc3339(clock_.now(), config_.timezone)},
                {"master_on", master_on_},
                {"appliances", appliances_json()},
                {"ports", ports_json()},
                {"timers", timers},
                {"last_event_seq", log_.last_seq()}};
}

std::optional<std::filesystem::path> Controller::snapshot_path() const {
    if (!dir_) return std::nullopt;
    return *dir_ / kSnapshotFile;
}

std::optional<std::filesystem::path> Controller::event_log_path() const { return log_file(dir_); }

json Controller::snapshot_json() const {
    json appliances = json::array();
    for (const auto& a : registry_.states()) {
        appliances.push_back(
            {{"channel", a.channel}, {"name", a.name}, {"kind", a.kind}, {"state", to_string(a.state)}});
    }
    json pending = json::array();
    for (const auto& j : scheduler_.list_jobs(JobStatus::Pending)) pending.push_back(codec::to_json(j));
    json latches = json::object();
    for (auto addr : bank_.addresses()) {
        latches[port::format_address(addr)] = port::format_byte(bank_.read_byte(addr));
    }
    return json{{"schema_version", kSnapshotSchemaVersion},
                {"saved_at", format_rfc3339(clock_.now())},
                {"config_checksum", config_checksum(config_)},
                {"last_event_seq", log_.last_seq()},
                {"next_job_seq", scheduler_.next_seq()},
                {"master_on", master_on_},
                {"appliances", appliances},
                {"pending_jobs", pending},
                {"port_latches", latches}};
}

void Controller::save_snapshot() {
    auto path = snapshot_path();
    if (!path) return;
    auto tmp = *path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        out << snapshot_json().dump(2) << '\n';
        out.flush();
        if (!out) throw Error(Errc::persistence_io, "cannot write snapshot " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, *path, ec);
    if (ec) throw Error(Errc::persistence_io, "cannot replace snapshot " + path->string() + ": " + ec.message());
}

void Controller::restore_snapshot(const json& snap, RecoveryReport& report) {
    if (snap.at("schema_version").get<int>() != kSnapshotSchemaVersion) {
        throw Error(Errc::corrupt_snapshot, "unsupported schema_version");
    }
    if (snap.at("config_checksum").get<std::string>() != config_checksum(config_)) {
        report.warnings.push_back("snapshot was written under a different configuration; "
                                  "restoring by channel");
    }
    master_on_ = snap.at("master_on").get<bool>();
    for (const auto& a : snap.at("appliances")) {
        auto channel = a.at("channel").get<int>();
        if (!registry_.has_channel(channel)) {
            report.warnings.push_back("snapshot appliance on channel " + std::to_string(channel) +
                                      " is no longer configured");
            continue;
        }
        registry_.restore_state(channel, parse_power_state(a.at("state").get<std::string>()));
    }
    for (const auto& j : snap.at("pending_jobs")) {
        auto job = codec::job_from_json(j);
        if (scheduler_.contains(job.id)) continue;
        if (!registry_.has_channel(job.channel)) {
            report.warnings.push_back("dropping " + job.id + ": channel " +
                                      std::to_string(job.channel) + " is no longer configured");
            continue;
        }
        scheduler_.restore(std::move(job));
    }
    scheduler_.set_next_seq(snap.at("next_job_seq").get<std::uint64_t>());
    log_.reserve_through(snap.at("last_event_seq").get<std::uint64_t>());
}

void Controller::replay_event(const Event& e, RecoveryReport& report) {
    const auto& p = e.payload;
    switch (e.kind) {
        case EventKind::StateChanged: {
            auto channel = p.at("channel").get<int>();
            if (registry_.has_channel(channel)) {
                registry_.restore_state(channel, parse_power_state(p.at("state").get<std::string>()));
            }
            break;
        }
        case EventKind::MasterSwitched:
            master_on_ = p.at("on").get<bool>();
            break;
        case EventKind::TimerAdded: {
            auto job = codec::job_from_json(p.at("job"));
            job.status = JobStatus::Pending;
            job.resolved_at.reset();
            if (!scheduler_.contains(job.id) && registry_.has_channel(job.channel)) {
                scheduler_.restore(std::move(job));
            }
            break;
        }
        case EventKind::TimerFired:
        case EventKind::TimerMissed:
        case EventKind::TimerCancelled: {
            auto job = codec::job_from_json(p.at("job"));
            if (scheduler_.contains(job.id)) scheduler_.mark_resolved(job.id, job.status, job.resolved_at);
            break;
        }
        case EventKind::CommandRecognized:
        case EventKind::CommandRejected:
            break;
    }
    ++report.replayed_events;
}

RecoveryReport Controller::recover() {
    RecoveryReport report;
    std::uint64_t replay_from = 0;

    if (auto path = snapshot_path(); path && std::filesystem::exists(*path)) {
        try {
            std::ifstream in(*path);
            auto snap = json::parse(in);
            restore_snapshot(snap, report);
            replay_from = snap.at("last_event_seq").get<std::uint64_t>();
        } catch (const std::exception& e) {
            throw Error(Errc::corrupt_snapshot, path->string() + ": " + e.what());
        }
        report.from_snapshot = true;
    }

    for (const auto& e : log_.since(replay_from)) {
        try {
            replay_event(e, report);
        } catch (const std::exception& ex) {
            throw Error(Errc::corrupt_snapshot, "event " + std::to_string(e.seq) + " in " +
                                                    (event_log_path() ? event_log_path()->string() : "log") +
                                                    ": " + ex.what());
        }
    }

    // Make the boxes match the restored appliance states.
    backend_.set_master(master_on_);
    registry_.sync_latches();

    report.resolved = tick(clock_.now());
    save_snapshot();
    return report;
}

}  // namespace hearth::service
