#pragma once

// JSON shapes shared by the HTTP API, the event payloads and the snapshot.

#include "json.hpp"

#include "hearth/appliance_registry.hpp"
#include "hearth/datetime.hpp"
#include "hearth/interface_box.hpp"
#include "hearth/timer_scheduler.hpp"
#include "hearth/voice_command.hpp"

namespace hearth::codec {

nlohmann::json to_json(const Appliance& a, const ChannelLocation& loc);
nlohmann::json to_json(const TimerJob& job);
/// Inverse of to_json(TimerJob). Throws Errc::parse_error.
TimerJob job_from_json(const nlohmann::json& j);
nlohmann::json to_json(const box::BoxState& s);
nlohmann::json to_json(const voice::CommandMatch& m);
nlohmann::json to_json(const StateChange& c);

}  // namespace hearth::codec
