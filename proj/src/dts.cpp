#include "hotpotato/dts.hpp"

namespace hotpotato::dts {

std::string_view to_string(Mode mode) {
    return mode == Mode::Connected ? "connected" : "disconnected";
}

Client::Client(DeviceId self, ClientConfig config, Scheduler& scheduler, Radio& radio,
               persistence::Storage& storage, const echo::NeighborTable& table)
    : self_(self),
      config_(config),
      scheduler_(scheduler),
      radio_(radio),
      storage_(storage),
      table_(table) {}

void Client::start() {
    stop();
    awaiting_.reset();
    timer_ = scheduler_.schedule_in(config_.tick, self_, "dts.tick", [this] { tick(); });
}

void Client::stop() {
    if (timer_.valid()) scheduler_.cancel(timer_);
    timer_ = {};
}

Mode Client::mode() const {
    return table_.bidirectional_count(scheduler_.now(), Role::Station) > 0 ? Mode::Connected
                                                                            : Mode::Disconnected;
}

std::optional<DeviceId> Client::nearest_station() const {
    std::optional<DeviceId> best;
    double best_d = 0.0;
    for (DeviceId id : table_.bidirectional(scheduler_.now(), Role::Station)) {
        const double d = radio_.distance_between(self_, id);
        if (!best || d < best_d) {
            best = id;
            best_d = d;
        }
    }
    return best;
}

void Client::tick() {
    timer_ = scheduler_.schedule_in(config_.tick, self_, "dts.tick", [this] { tick(); });
    if (awaiting_) {
        if (scheduler_.now() < awaiting_->deadline) return;
        awaiting_.reset();
        ++retransmissions_;
    }
    try_send();
}

void Client::try_send() {
    if (awaiting_ || backlog() == 0) return;
    const auto station = nearest_station();
    if (!station) return;
    auto entries = storage_.entries_after(storage_.upload_watermark(), config_.batch_size);
    if (entries.empty()) return;
    const std::uint64_t through = entries.back().seq;
    DtsBatch batch{self_, *station, std::move(entries)};
    radio_.unicast(self_, *station, Message{DtsMessage{std::move(batch)}});
    ++batches_sent_;
    awaiting_ = Awaiting{through, scheduler_.now() + config_.ack_timeout};
}

void Client::on_ack(const DtsAck& ack) {
    if (ack.player != self_) return;
    storage_.set_upload_watermark(ack.acked_through);
    if (awaiting_ && ack.acked_through >= awaiting_->through) {
        awaiting_.reset();
        try_send();
    }
}

}  // namespace hotpotato::dts
