#include "hotpotato/events.hpp"

#include <array>
#include <charconv>

namespace hotpotato {

namespace {

constexpr std::array<std::string_view, 13> kEventNames{
    "GameStarted", "GestureRecognized", "Generated",       "PassInitiated", "PassCompleted",
    "PassReceived", "PassFailed",       "Exploded",        "PotatoDiscarded", "Eliminated",
    "GameOver",     "Rebooted",         "Recovered",
};

constexpr std::array<std::string_view, 4> kReasonNames{
    "no_neighbor", "aborted", "prepare_timeout", "commit_unacked",
};

}  // namespace

std::string to_string(ActionId id) {
    return std::to_string(id.initiator) + ":" + std::to_string(id.counter);
}

std::optional<ActionId> parse_action_id(std::string_view text) {
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) return std::nullopt;
    ActionId id;
    const auto* first = text.data();
    const auto* mid = text.data() + colon;
    const auto* last = text.data() + text.size();
    auto r1 = std::from_chars(first, mid, id.initiator);
    auto r2 = std::from_chars(mid + 1, last, id.counter);
    if (r1.ec != std::errc{} || r1.ptr != mid || r2.ec != std::errc{} || r2.ptr != last) {
        return std::nullopt;
    }
    return id;
}

std::string_view to_string(EventKind kind) { return kEventNames.at(static_cast<std::size_t>(kind)); }

std::optional<EventKind> parse_event_kind(std::string_view text) {
    for (std::size_t i = 0; i < kEventNames.size(); ++i) {
        if (kEventNames[i] == text) return static_cast<EventKind>(i);
    }
    return std::nullopt;
}

bool is_essential(EventKind kind) {
    switch (kind) {
        case EventKind::GestureRecognized:
        case EventKind::Rebooted:
            return false;
        default:
            return true;
    }
}

std::string_view to_string(FailReason reason) {
    return kReasonNames.at(static_cast<std::size_t>(reason));
}

std::optional<FailReason> parse_fail_reason(std::string_view text) {
    for (std::size_t i = 0; i < kReasonNames.size(); ++i) {
        if (kReasonNames[i] == text) return static_cast<FailReason>(i);
    }
    return std::nullopt;
}

}  // namespace hotpotato
