#include "hotpotato/sim_kernel.hpp"

#include <cmath>
#include <numbers>

namespace hotpotato {

EventHandle Scheduler::schedule(SimTime fire_at, std::optional<DeviceId> target,
                                std::string_view label, Callback cb) {
    if (fire_at < now_) {
        throw SchedulingError("cannot schedule '" + std::string(label) + "' at " +
                              std::to_string(to_ms(fire_at)) + " ms, clock is at " +
                              std::to_string(to_ms(now_)) + " ms");
    }
    EventHandle handle{fire_at, next_seq_++};
    queue_.emplace(handle, Entry{target, label, std::move(cb)});
    return handle;
}

bool Scheduler::cancel(EventHandle handle) { return queue_.erase(handle) > 0; }

std::size_t Scheduler::cancel_target(DeviceId target) {
    std::size_t removed = 0;
    for (auto it = queue_.begin(); it != queue_.end();) {
        if (it->second.target == target) {
            it = queue_.erase(it);
            ++removed;
        } else {
            ++it;
        }
    }
    return removed;
}

bool Scheduler::step() {
    if (queue_.empty()) return false;
    auto node = queue_.extract(queue_.begin());
    now_ = node.key().fire_at;
    ++executed_;
    if (tracing_) {
        trace_.push_back({node.key().fire_at, node.key().seq, node.mapped().target,
                          node.mapped().label});
    }
    node.mapped().cb();
    return true;
}

std::size_t Scheduler::run_until(SimTime end) {
    if (end < now_) {
        throw SchedulingError("run_until target " + std::to_string(to_ms(end)) +
                              " ms precedes clock " + std::to_string(to_ms(now_)) + " ms");
    }
    std::size_t count = 0;
    while (!queue_.empty() && queue_.begin()->first.fire_at <= end) {
        step();
        ++count;
    }
    now_ = end;
    return count;
}

std::optional<SimTime> Scheduler::next_time() const {
    if (queue_.empty()) return std::nullopt;
    return queue_.begin()->first.fire_at;
}

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {
constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
}  // namespace

RngStream::RngStream(std::uint64_t seed, std::string_view label, std::uint64_t index) {
    std::uint64_t state = seed;
    std::uint64_t mix = splitmix64(state) ^ fnv1a(label);
    state = mix;
    mix = splitmix64(state) ^ (index * 0xd1342543de82ef95ULL);
    state = mix;
    for (auto& word : s_) word = splitmix64(state);
}

std::uint64_t RngStream::next_u64() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double RngStream::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::uint64_t RngStream::below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("RngStream::below(0)");
    // Lemire-style rejection keeps the result unbiased.
    const std::uint64_t threshold = (0 - n) % n;
    while (true) {
        const std::uint64_t r = next_u64();
        if (r >= threshold) return r % n;
    }
}

double RngStream::normal() {
    if (spare_normal_) {
        const double v = *spare_normal_;
        spare_normal_.reset();
        return v;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_normal_ = radius * std::sin(angle);
    return radius * std::cos(angle);
}

}  // namespace hotpotato
