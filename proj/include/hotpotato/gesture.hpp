#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "hotpotato/sim_kernel.hpp"

namespace hotpotato::gesture {

enum class Label : std::uint8_t { Clockwise, CounterClockwise, FlickRight, FlickLeft, None };

inline constexpr Label kGestures[] = {Label::Clockwise, Label::CounterClockwise, Label::FlickRight,
                                      Label::FlickLeft};

std::string_view to_string(Label label);
std::optional<Label> parse_label(std::string_view text);
inline bool is_flick(Label l) { return l == Label::FlickRight || l == Label::FlickLeft; }

struct Sample {
    std::int64_t t_ms = 0;
    double ax = 0.0;
    double ay = 0.0;
    double az = 0.0;

    bool operator==(const Sample&) const = default;
};

/// Accelerometer trace in m/s^2, gravity included.
struct AccelTrace {
    double rate_hz = 50.0;
    std::vector<Sample> samples;

    std::int64_t duration_ms() const;
    bool operator==(const AccelTrace&) const = default;
};

class GestureError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline constexpr double kGravity = 9.81;
inline constexpr double kSampleRateHz = 50.0;
inline constexpr double kFlickPeak = 18.0;
inline constexpr double kCircleAmplitude = 6.0;

/// Zero-noise template plus N(0, noise_sigma) on every axis.
/// Throws GestureError for a negative sigma.
AccelTrace synthesize(Label label, double noise_sigma, RngStream& rng,
                      double rate_hz = kSampleRateHz);

struct Thresholds {
    double flick_peak = 12.0;
    /// Longest time the lateral signal may stay above half its peak for the
    /// motion to count as a pulse.
    std::int64_t flick_max_width_ms = 200;
    std::int64_t rotation_lag_ms = 100;
    /// Half the rotation energy of the zero-noise circular template.
    double rotation_energy = 0.0;
};

const Thresholds& default_thresholds();

struct Features {
    double lateral_peak = 0.0;
    double lateral_peak_signed = 0.0;
    std::int64_t above_half_ms = 0;
    double rotation = 0.0;
};

/// Throws GestureError for traces outside [200, 3000] ms or with irregular
/// timestamps.
void validate(const AccelTrace& trace);
Features extract(const AccelTrace& trace, std::int64_t rotation_lag_ms);
/// User-independent rule-based classifier. Consumes no randomness.
Label classify(const AccelTrace& trace, const Thresholds& th = default_thresholds());

/// Corpus blocks: "# label=<L> sigma=<s> seed=<n> rate_hz=<r>", a
/// "t,ax,ay,az" header, then one sample per line.
struct CorpusEntry {
    Label label = Label::None;
    double sigma = 0.0;
    std::uint64_t seed = 0;
    AccelTrace trace;
};

void write_corpus(std::ostream& out, const std::vector<CorpusEntry>& entries);
std::vector<CorpusEntry> read_corpus(std::istream& in);

}  // namespace hotpotato::gesture
