#include "hearth/codec.hpp"

#include "hearth/error.hpp"

namespace hearth::codec {

using nlohmann::json;

json to_json(const Appliance& a, const ChannelLocation& loc) {
    return json{{"channel", a.channel},
                {"name", a.name},
                {"kind", a.kind},
                {"state", to_string(a.state)},
                {"port", port::format_address(loc.port)},
                {"bit", loc.bit}};
}

json to_json(const TimerJob& job) {
    json j{{"id", job.id},
           {"fire_at", format_rfc3339(job.fire_at)},
           {"channel", job.channel},
           {"desired", to_string(job.desired)},
           {"seq", job.seq},
           {"status", to_string(job.status)}};
    j["resolved_at"] = job.resolved_at ? json(format_rfc3339(*job.resolved_at)) : json(nullptr);
    return j;
}

TimerJob job_from_json(const json& j) {
    try {
        TimerJob job;
        job.id = j.at("id").get<std::string>();
        job.fire_at = parse_datetime(j.at("fire_at").get<std::string>(), UtcOffset{});
        job.channel = j.at("channel").get<int>();
        job.desired = parse_power_state(j.at("desired").get<std::string>());
        job.seq = j.at("seq").get<std::uint64_t>();
        job.status = parse_job_status(j.at("status").get<std::string>());
        if (j.contains("resolved_at") && !j.at("resolved_at").is_null()) {
            job.resolved_at = parse_datetime(j.at("resolved_at").get<std::string>(), UtcOffset{}).instant;
        }
        return job;
    } catch (const json::exception& e) {
        throw Error(Errc::parse_error, std::string("bad timer job record: ") + e.what());
    } catch (const Error& e) {
        throw Error(Errc::parse_error, std::string("bad timer job record: ") + e.what());
    }
}

json to_json(const box::BoxState& s) {
    json relays = json::array(), sockets = json::array(), leds = json::array();
    for (int i = 0; i < box::kRelayCount; ++i) {
        relays.push_back({{"energized", s.relays[i].coil_energized},
                          {"contact", s.relays[i].contact == box::Contact::NormallyOpenClosed ? "NO" : "NC"}});
        sockets.push_back(s.sockets[i].powered);
        leds.push_back(s.leds[i].lit);
    }
    return json{{"master_on", s.master_on},
                {"latch", port::format_byte(s.latch)},
                {"relays", relays},
                {"sockets", sockets},
                {"leds", leds}};
}

json to_json(const voice::CommandMatch& m) {
    json j{{"word", m.word},
           {"distance", m.distance},
           {"confidence", m.confidence},
           {"accepted", m.accepted}};
    if (m.binding) {
        j["binding"] = {{"channel", m.binding->channel}, {"state", to_string(m.binding->state)}};
    } else {
        j["binding"] = nullptr;
    }
    return j;
}

json to_json(const StateChange& c) {
    return json{{"channel", c.appliance.channel},
                {"name", c.appliance.name},
                {"state", to_string(c.appliance.state)},
                {"previous", to_string(c.previous)},
                {"port", port::format_address(c.port)},
                {"latch", port::format_byte(c.latch)}};
}

}  // namespace hearth::codec
