#include "hearth/error.hpp"

namespace hearth {

std::string_view errc_name(Errc code) noexcept {
    switch (code) {
        case Errc::unknown_port: return "unknown-port";
        case Errc::index_out_of_range: return "index-out-of-range";
        case Errc::duplicate_channel: return "duplicate-channel";
        case Errc::duplicate_name: return "duplicate-name";
        case Errc::invalid_name: return "invalid-name";
        case Errc::unknown_appliance: return "unknown-appliance";
        case Errc::unknown_channel: return "unknown-channel";
        case Errc::unparseable_datetime: return "unparseable-datetime";
        case Errc::unknown_id: return "unknown-id";
        case Errc::clock_regression: return "clock-regression";
        case Errc::parse_error: return "parse-error";
        case Errc::unknown_phoneme: return "unknown-phoneme";
        case Errc::empty_utterance: return "empty-utterance";
        case Errc::unknown_word: return "unknown-word";
        case Errc::invalid_config: return "invalid-config";
        case Errc::invalid_request: return "invalid-request";
        case Errc::persistence_io: return "persistence-io";
        case Errc::corrupt_snapshot: return "corrupt-snapshot";
        case Errc::not_supported: return "not-supported";
        case Errc::port_in_use: return "port-in-use";
    }
    return "error";
}

}  // namespace hearth
