#include "hotpotato/radio.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hotpotato {

std::string_view to_string(Role role) {
    switch (role) {
        case Role::Player: return "player";
        case Role::Station: return "station";
        case Role::Spectator: return "spectator";
    }
    return "?";
}

std::string_view to_string(ActionKind kind) {
    switch (kind) {
        case ActionKind::Prepare: return "Prepare";
        case ActionKind::Ready: return "Ready";
        case ActionKind::Abort: return "Abort";
        case ActionKind::Commit: return "Commit";
        case ActionKind::CommitAck: return "CommitAck";
    }
    return "?";
}

double distance(Position a, Position b) { return std::hypot(a.x - b.x, a.y - b.y); }

Position Field::clamp(Position p) const {
    return {std::clamp(p.x, 0.0, width), std::clamp(p.y, 0.0, height)};
}

bool reaches(const LinkModel& model, Position from, double tx_factor_from, Position to) {
    return distance(from, to) <= model.base_range * tx_factor_from;
}

Radio::Radio(Scheduler& scheduler, Field field, LinkModel model, std::uint64_t seed)
    : scheduler_(scheduler), field_(field), model_(model), seed_(seed) {
    if (model_.p_loss < 0.0 || model_.p_loss > 1.0) {
        throw std::invalid_argument("p_loss must lie in [0, 1]");
    }
}

void Radio::add_node(DeviceId id, Position pos, double tx_factor) {
    if (nodes_.contains(id)) throw std::invalid_argument("duplicate radio node " + std::to_string(id));
    nodes_.emplace(id, Node{field_.clamp(pos), tx_factor, true, {}, RngStream(seed_, "radio", id)});
}

void Radio::set_handler(DeviceId id, Handler handler) { nodes_.at(id).handler = std::move(handler); }

void Radio::set_online(DeviceId id, bool online) { nodes_.at(id).online = online; }

bool Radio::online(DeviceId id) const { return nodes_.at(id).online; }

Position Radio::set_position(DeviceId id, Position pos) {
    const Position clamped = field_.clamp(pos);
    if (!(clamped == pos) && clamp_observer_) clamp_observer_(id, pos, clamped);
    nodes_.at(id).pos = clamped;
    return clamped;
}

Position Radio::position(DeviceId id) const { return nodes_.at(id).pos; }

double Radio::tx_factor(DeviceId id) const { return nodes_.at(id).tx_factor; }

void Radio::set_tx_factor(DeviceId id, double factor) { nodes_.at(id).tx_factor = factor; }

bool Radio::reaches(DeviceId from, DeviceId to) const {
    const Node& a = nodes_.at(from);
    const Node& b = nodes_.at(to);
    return hotpotato::reaches(model_, a.pos, a.tx_factor, b.pos);
}

double Radio::distance_between(DeviceId a, DeviceId b) const {
    return distance(nodes_.at(a).pos, nodes_.at(b).pos);
}

bool Radio::attempt(const std::shared_ptr<const RadioFrame>& frame, Node& sender, DeviceId receiver) {
    // The draw happens even when a scripted override decides, so scripted
    // tests do not shift the stream for later frames.
    bool dropped = sender.loss_rng.uniform() < model_.p_loss;
    if (loss_override_) {
        if (auto forced = loss_override_(*frame, receiver)) dropped = *forced;
    }
    ++frames_sent_;
    if (dropped) {
        ++frames_lost_;
        return false;
    }
    const auto fam = static_cast<std::size_t>(family_of(*frame->payload));
    ++in_flight_[fam];
    scheduler_.schedule(frame->sent_at + model_.latency, std::nullopt, "radio.deliver",
                        [this, frame, receiver, fam] {
                            --in_flight_[fam];
                            Node& node = nodes_.at(receiver);
                            if (node.online && node.handler) node.handler(*frame);
                        });
    return true;
}

std::vector<Delivery> Radio::broadcast(DeviceId sender, Message payload) {
    Node& from = nodes_.at(sender);
    std::vector<Delivery> out;
    if (!from.online) return out;
    auto frame = std::make_shared<const RadioFrame>(RadioFrame{
        sender, std::make_shared<const Message>(std::move(payload)), scheduler_.now()});
    for (auto& [id, node] : nodes_) {
        if (id == sender) continue;
        if (!hotpotato::reaches(model_, from.pos, from.tx_factor, node.pos)) continue;
        if (attempt(frame, from, id)) out.push_back({id, frame->sent_at + model_.latency});
    }
    return out;
}

std::optional<SimTime> Radio::unicast(DeviceId sender, DeviceId receiver, Message payload) {
    Node& from = nodes_.at(sender);
    if (!from.online || !nodes_.contains(receiver)) return std::nullopt;
    if (!hotpotato::reaches(model_, from.pos, from.tx_factor, nodes_.at(receiver).pos)) {
        return std::nullopt;
    }
    auto frame = std::make_shared<const RadioFrame>(RadioFrame{
        sender, std::make_shared<const Message>(std::move(payload)), scheduler_.now()});
    if (!attempt(frame, from, receiver)) return std::nullopt;
    return frame->sent_at + model_.latency;
}

}  // namespace hotpotato
