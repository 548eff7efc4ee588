#pragma once

#include <cstdint>
#include <optional>

#include "hotpotato/echo.hpp"
#include "hotpotato/messages.hpp"
#include "hotpotato/persistence.hpp"
#include "hotpotato/radio.hpp"
#include "hotpotato/sim_kernel.hpp"

namespace hotpotato::dts {

struct ClientConfig {
    std::size_t batch_size = 16;
    Duration ack_timeout{1000};
    Duration tick{500};
};

enum class Mode : std::uint8_t { Connected, Disconnected };

std::string_view to_string(Mode mode);

/// Player-side Delay-Tolerant Service. Uploads durable log entries above the
/// storage's ack watermark to the nearest bidirectional Station; entries
/// leave the buffer only when a Station acknowledges them.
class Client {
public:
    Client(DeviceId self, ClientConfig config, Scheduler& scheduler, Radio& radio,
           persistence::Storage& storage, const echo::NeighborTable& table);

    void start();
    void stop();
    void on_ack(const DtsAck& ack);

    Mode mode() const;
    std::optional<DeviceId> nearest_station() const;
    /// Entries not yet acknowledged by any Station.
    std::uint64_t backlog() const { return storage_.last_seq() - storage_.upload_watermark(); }
    bool awaiting_ack() const { return awaiting_.has_value(); }

    std::uint64_t batches_sent() const { return batches_sent_; }
    std::uint64_t retransmissions() const { return retransmissions_; }

private:
    struct Awaiting {
        std::uint64_t through = 0;
        SimTime deadline{};
    };

    void tick();
    void try_send();

    DeviceId self_;
    ClientConfig config_;
    Scheduler& scheduler_;
    Radio& radio_;
    persistence::Storage& storage_;
    const echo::NeighborTable& table_;
    std::optional<Awaiting> awaiting_;
    EventHandle timer_;
    std::uint64_t batches_sent_ = 0;
    std::uint64_t retransmissions_ = 0;
};

}  // namespace hotpotato::dts
