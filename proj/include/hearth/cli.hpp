#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hearth::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitApiError = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInvalidConfig = 2;
inline constexpr int kExitPersistence = 3;
inline constexpr int kExitUnreachable = 4;

inline constexpr const char* kAddrEnv = "HEARTHCTL_ADDR";
inline constexpr const char* kDefaultAddr = "127.0.0.1:8470";

/// `args[0]` is the program name. Client verbs talk to the service named by
/// --addr, else $HEARTHCTL_ADDR, else 127.0.0.1:8470.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hearth::cli
