#include "hotpotato/echo.hpp"

#include <algorithm>

namespace hotpotato::echo {

void NeighborTable::on_beacon(const Beacon& beacon, SimTime now) {
    if (beacon.sender == self_) return;
    const bool lists_me =
        std::find(beacon.heard.begin(), beacon.heard.end(), self_) != beacon.heard.end();
    entries_[beacon.sender] = NeighborEntry{beacon.role, now, lists_me};
}

std::vector<DeviceId> NeighborTable::expire_stale(SimTime now) {
    std::vector<DeviceId> removed;
    for (auto it = entries_.begin(); it != entries_.end();) {
        if (!fresh(it->second, now)) {
            removed.push_back(it->first);
            it = entries_.erase(it);
        } else {
            ++it;
        }
    }
    return removed;
}

std::vector<DeviceId> NeighborTable::heard_list(SimTime now, std::size_t cap) const {
    std::vector<std::pair<SimTime, DeviceId>> recent;
    for (const auto& [id, e] : entries_) {
        if (fresh(e, now)) recent.emplace_back(e.last_heard, id);
    }
    if (recent.size() > cap) {
        // Most recently heard first; ties keep the lower id.
        std::stable_sort(recent.begin(), recent.end(),
                         [](const auto& a, const auto& b) { return a.first > b.first; });
        recent.resize(cap);
    }
    std::vector<DeviceId> ids;
    ids.reserve(recent.size());
    for (const auto& r : recent) ids.push_back(r.second);
    std::sort(ids.begin(), ids.end());
    return ids;
}

std::vector<DeviceId> NeighborTable::bidirectional(SimTime now, std::optional<Role> role) const {
    std::vector<DeviceId> ids;
    for (const auto& [id, e] : entries_) {
        if (e.bidirectional && fresh(e, now) && (!role || e.role == *role)) ids.push_back(id);
    }
    return ids;
}

std::size_t NeighborTable::bidirectional_count(SimTime now, std::optional<Role> role) const {
    std::size_t n = 0;
    for (const auto& [id, e] : entries_) {
        if (e.bidirectional && fresh(e, now) && (!role || e.role == *role)) ++n;
    }
    return n;
}

std::optional<NeighborEntry> NeighborTable::find(DeviceId id, SimTime now) const {
    auto it = entries_.find(id);
    if (it == entries_.end() || !fresh(it->second, now)) return std::nullopt;
    return it->second;
}

EchoProtocol::EchoProtocol(DeviceId self, Role role, Config config, Scheduler& scheduler,
                           Radio& radio, std::uint64_t seed)
    : self_(self),
      role_(role),
      config_(config),
      scheduler_(scheduler),
      radio_(radio),
      jitter_rng_(seed, "echo", self),
      table_(self, config.staleness) {
    if (config_.heard_cap > 255) throw std::invalid_argument("heard_cap must fit in one byte");
}

void EchoProtocol::start(SimTime epoch) {
    stop();
    epoch_ = epoch;
    round_ = 0;
    arm_next();
}

void EchoProtocol::stop() {
    if (timer_.valid()) scheduler_.cancel(timer_);
    timer_ = {};
}

void EchoProtocol::arm_next() {
    const auto jitter = Duration{static_cast<std::int64_t>(
        jitter_rng_.below(static_cast<std::uint64_t>(config_.max_jitter.count()) + 1))};
    const SimTime at = std::max(scheduler_.now(), epoch_ + config_.period * static_cast<std::int64_t>(round_) + jitter);
    ++round_;
    timer_ = scheduler_.schedule(at, self_, "echo.beacon", [this] { emit(); });
}

Beacon EchoProtocol::make_beacon() const {
    const SimTime now = scheduler_.now();
    return Beacon{self_, role_, table_.heard_list(now, config_.heard_cap), now};
}

void EchoProtocol::emit() {
    table_.expire_stale(scheduler_.now());
    Beacon beacon = make_beacon();
    if (observer_) observer_(beacon);
    radio_.broadcast(self_, std::move(beacon));
    arm_next();
}

void EchoProtocol::on_beacon(const Beacon& beacon) { table_.on_beacon(beacon, scheduler_.now()); }

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_le(std::span<const std::uint8_t> bytes, std::size_t& offset, int width) {
    if (offset + static_cast<std::size_t>(width) > bytes.size()) {
        throw WireError("beacon record truncated at byte " + std::to_string(offset));
    }
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(bytes[offset + i]) << (8 * i);
    offset += static_cast<std::size_t>(width);
    return v;
}

}  // namespace

void encode_into(const Beacon& beacon, std::vector<std::uint8_t>& out) {
    if (beacon.heard.size() > 255) throw WireError("heard list exceeds 255 ids");
    put_u16(out, beacon.sender);
    out.push_back(static_cast<std::uint8_t>(beacon.role));
    out.push_back(static_cast<std::uint8_t>(beacon.heard.size()));
    for (DeviceId id : beacon.heard) put_u16(out, id);
    put_u64(out, static_cast<std::uint64_t>(to_ms(beacon.sent_at)));
}

std::vector<std::uint8_t> encode(const Beacon& beacon) {
    std::vector<std::uint8_t> out;
    out.reserve(12 + 2 * beacon.heard.size());
    encode_into(beacon, out);
    return out;
}

Beacon decode(std::span<const std::uint8_t> bytes, std::size_t& offset) {
    Beacon b;
    b.sender = static_cast<DeviceId>(get_le(bytes, offset, 2));
    const auto role = get_le(bytes, offset, 1);
    if (role > static_cast<std::uint64_t>(Role::Spectator)) {
        throw WireError("unknown role byte " + std::to_string(role));
    }
    b.role = static_cast<Role>(role);
    const auto count = get_le(bytes, offset, 1);
    b.heard.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        b.heard.push_back(static_cast<DeviceId>(get_le(bytes, offset, 2)));
    }
    b.sent_at = at_ms(static_cast<std::int64_t>(get_le(bytes, offset, 8)));
    return b;
}

std::vector<Beacon> decode_all(std::span<const std::uint8_t> bytes) {
    std::vector<Beacon> out;
    std::size_t offset = 0;
    while (offset < bytes.size()) out.push_back(decode(bytes, offset));
    return out;
}

}  // namespace hotpotato::echo
