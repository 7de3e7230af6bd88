#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hearth {

enum class Errc {
    unknown_port,
    index_out_of_range,
    duplicate_channel,
    duplicate_name,
    invalid_name,
    unknown_appliance,
    unknown_channel,
    unparseable_datetime,
    unknown_id,
    clock_regression,
    parse_error,
    unknown_phoneme,
    empty_utterance,
    unknown_word,
    invalid_config,
    invalid_request,
    persistence_io,
    corrupt_snapshot,
    not_supported,
    port_in_use,
};

/// Stable kebab-case name used in API error bodies and CLI diagnostics.
std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace hearth
