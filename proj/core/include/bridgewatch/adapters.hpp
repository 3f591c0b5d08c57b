#pragma once

#include <chrono>
#include <functional>
#include <string>

namespace bridgewatch {

/// Carries one JSON request to an external backend and returns its JSON
/// reply. Transports signal failure by throwing bridgewatch::Error with
/// AdapterUnavailable or AdapterTimeout.
using JsonTransport = std::function<std::string(const std::string& request, std::chrono::milliseconds timeout)>;

inline constexpr std::chrono::milliseconds kDefaultAdapterTimeout{5000};

}  // namespace bridgewatch
