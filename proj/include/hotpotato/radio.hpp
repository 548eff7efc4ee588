#pragma once

#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "hotpotato/messages.hpp"
#include "hotpotato/sim_kernel.hpp"

namespace hotpotato {

struct Position {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Position&) const = default;
};

double distance(Position a, Position b);

struct Field {
    double width = 10.0;
    double height = 15.0;

    bool contains(Position p) const {
        return p.x >= 0.0 && p.x <= width && p.y >= 0.0 && p.y <= height;
    }
    Position clamp(Position p) const;

    bool operator==(const Field&) const = default;
};

struct LinkModel {
    double base_range = 10.0;
    double p_loss = 0.05;
    Duration latency{5};

    bool operator==(const LinkModel&) const = default;
};

/// Directed disc reachability: A reaches B iff distance <= base_range * factor(A).
bool reaches(const LinkModel& model, Position from, double tx_factor_from, Position to);

struct Delivery {
    DeviceId receiver = 0;
    SimTime at{};

    bool operator==(const Delivery&) const = default;
};

/// Broadcast medium shared by every device. Reachability is a pure function
/// of positions, base range and per-sender tx factors; loss draws consume the
/// per-sender "radio" streams and nothing else.
class Radio {
public:
    using Handler = std::function<void(const RadioFrame&)>;
    /// Scripted-loss hook for tests: return true to force a drop, false to
    /// force delivery, nullopt to keep the random outcome.
    using LossOverride =
        std::function<std::optional<bool>(const RadioFrame&, DeviceId receiver)>;
    using ClampObserver = std::function<void(DeviceId, Position requested, Position clamped)>;

    Radio(Scheduler& scheduler, Field field, LinkModel model, std::uint64_t seed);

    void add_node(DeviceId id, Position pos, double tx_factor = 1.0);
    bool has_node(DeviceId id) const { return nodes_.contains(id); }
    void set_handler(DeviceId id, Handler handler);
    /// Offline nodes neither send nor receive; frames in flight to them are
    /// dropped at delivery time.
    void set_online(DeviceId id, bool online);
    bool online(DeviceId id) const;

    /// Out-of-field positions are clamped to the boundary and reported to the
    /// clamp observer.
    Position set_position(DeviceId id, Position pos);
    Position position(DeviceId id) const;
    double tx_factor(DeviceId id) const;
    void set_tx_factor(DeviceId id, double factor);

    bool reaches(DeviceId from, DeviceId to) const;
    double distance_between(DeviceId a, DeviceId b) const;

    std::vector<Delivery> broadcast(DeviceId sender, Message payload);
    std::optional<SimTime> unicast(DeviceId sender, DeviceId receiver, Message payload);

    void set_loss_override(LossOverride hook) { loss_override_ = std::move(hook); }
    void set_clamp_observer(ClampObserver obs) { clamp_observer_ = std::move(obs); }

    const Field& field() const { return field_; }
    const LinkModel& model() const { return model_; }
    void set_loss(double p_loss) { model_.p_loss = p_loss; }

    /// Frames scheduled for delivery but not yet delivered, per family.
    std::size_t in_flight(MessageFamily family) const {
        return in_flight_[static_cast<std::size_t>(family)];
    }
    std::uint64_t frames_sent() const { return frames_sent_; }
    std::uint64_t frames_lost() const { return frames_lost_; }

private:
    struct Node {
        Position pos;
        double tx_factor = 1.0;
        bool online = true;
        Handler handler;
        RngStream loss_rng;
    };

    bool attempt(const std::shared_ptr<const RadioFrame>& frame, Node& sender, DeviceId receiver);

    Scheduler& scheduler_;
    Field field_;
    LinkModel model_;
    std::uint64_t seed_;
    std::map<DeviceId, Node> nodes_;
    LossOverride loss_override_;
    ClampObserver clamp_observer_;
    std::size_t in_flight_[3] = {0, 0, 0};
    std::uint64_t frames_sent_ = 0;
    std::uint64_t frames_lost_ = 0;
};

}  // namespace hotpotato
