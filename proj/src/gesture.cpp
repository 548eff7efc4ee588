#include "hotpotato/gesture.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

namespace hotpotato::gesture {

namespace {

constexpr std::int64_t kFlickDurationMs = 600;
constexpr double kFlickWidthMs = 40.0;
constexpr std::int64_t kCircleDurationMs = 1500;
constexpr double kCirclePeriodMs = 750.0;
constexpr std::int64_t kIdleDurationMs = 1000;

std::int64_t template_duration(Label label) {
    switch (label) {
        case Label::FlickLeft:
        case Label::FlickRight: return kFlickDurationMs;
        case Label::Clockwise:
        case Label::CounterClockwise: return kCircleDurationMs;
        case Label::None: return kIdleDurationMs;
    }
    return kIdleDurationMs;
}

// Deterministic, gravity-included template value at time t.
Sample template_at(Label label, std::int64_t t_ms) {
    Sample s{t_ms, 0.0, 0.0, kGravity};
    const double t = static_cast<double>(t_ms);
    switch (label) {
        case Label::FlickRight:
        case Label::FlickLeft: {
            const double z = (t - kFlickDurationMs / 2.0) / kFlickWidthMs;
            const double sign = label == Label::FlickRight ? 1.0 : -1.0;
            s.ax = sign * kFlickPeak * std::exp(-0.5 * z * z);
            break;
        }
        case Label::Clockwise:
        case Label::CounterClockwise: {
            const double phase = 2.0 * std::numbers::pi * t / kCirclePeriodMs;
            const double sign = label == Label::CounterClockwise ? 1.0 : -1.0;
            s.ax = kCircleAmplitude * std::cos(phase);
            s.ay = sign * kCircleAmplitude * std::sin(phase);
            break;
        }
        case Label::None: break;
    }
    return s;
}

double median(std::vector<double> v) {
    const auto mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    double m = v[mid];
    if (v.size() % 2 == 0) {
        m = (m + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid))) / 2.0;
    }
    return m;
}

Thresholds calibrate() {
    Thresholds th;
    RngStream unused(0, "gesture-calibration");
    const AccelTrace circle = synthesize(Label::CounterClockwise, 0.0, unused);
    th.rotation_energy = 0.5 * std::abs(extract(circle, th.rotation_lag_ms).rotation);
    return th;
}

}  // namespace

std::string_view to_string(Label label) {
    switch (label) {
        case Label::Clockwise: return "Clockwise";
        case Label::CounterClockwise: return "CounterClockwise";
        case Label::FlickRight: return "FlickRight";
        case Label::FlickLeft: return "FlickLeft";
        case Label::None: return "None";
    }
    return "None";
}

std::optional<Label> parse_label(std::string_view text) {
    for (Label l : {Label::Clockwise, Label::CounterClockwise, Label::FlickRight, Label::FlickLeft,
                    Label::None}) {
        if (to_string(l) == text) return l;
    }
    return std::nullopt;
}

std::int64_t AccelTrace::duration_ms() const {
    if (rate_hz <= 0.0) return 0;
    return static_cast<std::int64_t>(std::llround(static_cast<double>(samples.size()) * 1000.0 / rate_hz));
}

AccelTrace synthesize(Label label, double noise_sigma, RngStream& rng, double rate_hz) {
    if (!(noise_sigma >= 0.0)) throw GestureError("noise sigma must be >= 0");
    if (!(rate_hz > 0.0)) throw GestureError("sample rate must be positive");
    AccelTrace trace;
    trace.rate_hz = rate_hz;
    const auto n = static_cast<std::size_t>(
        std::llround(static_cast<double>(template_duration(label)) * rate_hz / 1000.0));
    trace.samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto t = static_cast<std::int64_t>(std::llround(static_cast<double>(i) * 1000.0 / rate_hz));
        Sample s = template_at(label, t);
        if (noise_sigma > 0.0) {
            s.ax += noise_sigma * rng.normal();
            s.ay += noise_sigma * rng.normal();
            s.az += noise_sigma * rng.normal();
        }
        trace.samples.push_back(s);
    }
    return trace;
}

const Thresholds& default_thresholds() {
    static const Thresholds th = calibrate();
    return th;
}

void validate(const AccelTrace& trace) {
    if (!(trace.rate_hz > 0.0)) throw GestureError("sample rate must be positive");
    const auto dur = trace.duration_ms();
    if (dur < 200 || dur > 3000) {
        throw GestureError("trace length " + std::to_string(dur) + " ms outside [200, 3000] ms");
    }
    const double step = 1000.0 / trace.rate_hz;
    const auto t0 = trace.samples.front().t_ms;
    for (std::size_t i = 0; i < trace.samples.size(); ++i) {
        const double expected = static_cast<double>(t0) + static_cast<double>(i) * step;
        if (std::abs(static_cast<double>(trace.samples[i].t_ms) - expected) > 1.0 ||
            (i > 0 && trace.samples[i].t_ms <= trace.samples[i - 1].t_ms)) {
            throw GestureError("sample " + std::to_string(i) + " breaks the declared rate");
        }
    }
}

Features extract(const AccelTrace& trace, std::int64_t rotation_lag_ms) {
    const std::size_t n = trace.samples.size();
    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = trace.samples[i].ax;
        ys[i] = trace.samples[i].ay;
    }
    // Gravity compensation: the per-axis median is the static component.
    const double bx = median(xs);
    const double by = median(ys);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] -= bx;
        ys[i] -= by;
    }

    Features f;
    for (double x : xs) {
        if (std::abs(x) > f.lateral_peak) {
            f.lateral_peak = std::abs(x);
            f.lateral_peak_signed = x;
        }
    }
    const double step_ms = 1000.0 / trace.rate_hz;
    const auto above = std::count_if(xs.begin(), xs.end(),
                                     [&](double x) { return std::abs(x) >= f.lateral_peak / 2.0; });
    f.above_half_ms = static_cast<std::int64_t>(std::llround(static_cast<double>(above) * step_ms));

    const auto lag = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(static_cast<double>(rotation_lag_ms) / step_ms)));
    if (n > lag) {
        double sum = 0.0;
        for (std::size_t i = 0; i + lag < n; ++i) sum += xs[i] * ys[i + lag] - ys[i] * xs[i + lag];
        f.rotation = sum / static_cast<double>(n - lag);
    }
    return f;
}

Label classify(const AccelTrace& trace, const Thresholds& th) {
    validate(trace);
    const Features f = extract(trace, th.rotation_lag_ms);
    if (f.lateral_peak >= th.flick_peak && f.above_half_ms <= th.flick_max_width_ms) {
        return f.lateral_peak_signed > 0 ? Label::FlickRight : Label::FlickLeft;
    }
    if (std::abs(f.rotation) >= th.rotation_energy) {
        return f.rotation > 0 ? Label::CounterClockwise : Label::Clockwise;
    }
    return Label::None;
}

void write_corpus(std::ostream& out, const std::vector<CorpusEntry>& entries) {
    for (const auto& e : entries) {
        out << "# label=" << to_string(e.label) << " sigma=" << e.sigma << " seed=" << e.seed
            << " rate_hz=" << e.trace.rate_hz << '\n';
        out << "t,ax,ay,az\n";
        out << std::setprecision(17);
        for (const auto& s : e.trace.samples) {
            out << s.t_ms << ',' << s.ax << ',' << s.ay << ',' << s.az << '\n';
        }
        out << std::setprecision(6);
    }
}

std::vector<CorpusEntry> read_corpus(std::istream& in) {
    std::vector<CorpusEntry> entries;
    std::string line;
    std::size_t lineno = 0;
    auto fail = [&](const std::string& what) {
        throw GestureError("corpus line " + std::to_string(lineno) + ": " + what);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line.rfind("# ", 0) == 0) {
            CorpusEntry e;
            std::istringstream fields(line.substr(2));
            std::string kv;
            while (fields >> kv) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos) fail("malformed header field '" + kv + "'");
                const auto key = kv.substr(0, eq);
                const auto value = kv.substr(eq + 1);
                if (key == "label") {
                    auto l = parse_label(value);
                    if (!l) fail("unknown label '" + value + "'");
                    e.label = *l;
                } else if (key == "sigma") {
                    e.sigma = std::stod(value);
                } else if (key == "seed") {
                    e.seed = std::stoull(value);
                } else if (key == "rate_hz") {
                    e.trace.rate_hz = std::stod(value);
                } else {
                    fail("unknown header key '" + key + "'");
                }
            }
            entries.push_back(std::move(e));
            continue;
        }
        if (line == "t,ax,ay,az") continue;
        if (entries.empty()) fail("sample before any header");
        Sample s;
        char c1 = 0, c2 = 0, c3 = 0;
        std::istringstream row(line);
        if (!(row >> s.t_ms >> c1 >> s.ax >> c2 >> s.ay >> c3 >> s.az) || c1 != ',' || c2 != ',' ||
            c3 != ',') {
            fail("malformed sample '" + line + "'");
        }
        entries.back().trace.samples.push_back(s);
    }
    return entries;
}

}  // namespace hotpotato::gesture
