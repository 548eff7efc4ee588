#include "hotpotato/persistence.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>

namespace hotpotato::persistence {

std::uint64_t Storage::append(SimTime at, GameEvent event) {
    if (log_.size() >= capacity_) {
        auto victim = std::find_if(log_.begin(), log_.end(),
                                   [](const LogEntry& e) { return !is_essential(e.event.kind); });
        if (victim != log_.end()) {
            log_.erase(victim);
            ++evicted_;
        }
    }
    const std::uint64_t seq = next_seq_++;
    log_.push_back(LogEntry{seq, at, device_, std::move(event)});
    return seq;
}

std::vector<LogEntry> Storage::entries_after(std::uint64_t after, std::size_t max) const {
    auto first = std::upper_bound(log_.begin(), log_.end(), after,
                                  [](std::uint64_t s, const LogEntry& e) { return s < e.seq; });
    std::vector<LogEntry> out;
    for (auto it = first; it != log_.end() && out.size() < max; ++it) out.push_back(*it);
    return out;
}

std::string format_line(const LogEntry& entry) {
    const GameEvent& ev = entry.event;
    std::string line = std::to_string(entry.seq);
    line += '\t';
    line += std::to_string(to_ms(entry.time));
    line += '\t';
    line += to_string(ev.kind);
    line += "\tdev=";
    line += std::to_string(entry.device);
    auto field = [&](std::string_view key, const std::string& value) {
        line += ' ';
        line += key;
        line += '=';
        line += value;
    };
    if (ev.potato) field("potato", std::to_string(*ev.potato));
    if (ev.action) field("action", to_string(*ev.action));
    if (ev.peer) field("peer", std::to_string(*ev.peer));
    if (ev.remaining_s) field("remaining", std::to_string(*ev.remaining_s));
    if (ev.progress_ms) field("progress", std::to_string(*ev.progress_ms));
    if (ev.fuse_s) field("fuse", std::to_string(*ev.fuse_s));
    if (ev.since_ms) field("since", std::to_string(*ev.since_ms));
    if (ev.reason) field("reason", std::string(to_string(*ev.reason)));
    if (!ev.label.empty()) field("label", ev.label);
    return line;
}

namespace {

template <typename T>
bool parse_number(std::string_view text, T& out) {
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc{} && ptr == text.data() + text.size();
}

std::vector<std::string_view> split(std::string_view text, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = text.find(sep, start);
        parts.push_back(text.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

}  // namespace

ParseResult parse_line(std::string_view line) {
    ParseResult result;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const auto cols = split(line, '\t');
    if (cols.size() != 4) {
        result.error = "expected 4 tab-separated columns, got " + std::to_string(cols.size());
        return result;
    }
    LogEntry entry;
    std::int64_t time_ms = 0;
    if (!parse_number(cols[0], entry.seq) || entry.seq == 0) {
        result.error = "bad seq '" + std::string(cols[0]) + "'";
        return result;
    }
    if (!parse_number(cols[1], time_ms) || time_ms < 0) {
        result.error = "bad time '" + std::string(cols[1]) + "'";
        return result;
    }
    entry.time = at_ms(time_ms);
    auto kind = parse_event_kind(cols[2]);
    if (!kind) {
        result.error = "unknown event kind '" + std::string(cols[2]) + "'";
        return result;
    }
    entry.event.kind = *kind;
    bool have_dev = false;
    for (auto kv : split(cols[3], ' ')) {
        if (kv.empty()) continue;
        const auto eq = kv.find('=');
        if (eq == std::string_view::npos) {
            result.error = "field without '=': '" + std::string(kv) + "'";
            return result;
        }
        const auto key = kv.substr(0, eq);
        const auto value = kv.substr(eq + 1);
        bool ok = true;
        GameEvent& ev = entry.event;
        if (key == "dev") {
            ok = parse_number(value, entry.device);
            have_dev = ok;
        } else if (key == "potato") {
            ok = parse_number(value, ev.potato.emplace());
        } else if (key == "action") {
            ev.action = parse_action_id(value);
            ok = ev.action.has_value();
        } else if (key == "peer") {
            ok = parse_number(value, ev.peer.emplace());
        } else if (key == "remaining") {
            ok = parse_number(value, ev.remaining_s.emplace());
        } else if (key == "progress") {
            ok = parse_number(value, ev.progress_ms.emplace());
        } else if (key == "fuse") {
            ok = parse_number(value, ev.fuse_s.emplace());
        } else if (key == "since") {
            ok = parse_number(value, ev.since_ms.emplace());
        } else if (key == "reason") {
            ev.reason = parse_fail_reason(value);
            ok = ev.reason.has_value();
        } else if (key == "label") {
            ev.label = std::string(value);
        } else {
            result.error = "unknown field '" + std::string(key) + "'";
            return result;
        }
        if (!ok) {
            result.error = "bad value for '" + std::string(key) + "'";
            return result;
        }
    }
    if (!have_dev) {
        result.error = "missing dev field";
        return result;
    }
    result.entry = std::move(entry);
    return result;
}

void write_log(std::ostream& out, const std::vector<LogEntry>& entries) {
    for (const auto& e : entries) out << format_line(e) << '\n';
}

ReadResult read_log(std::istream& in) {
    ReadResult result;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        auto parsed = parse_line(line);
        if (parsed.entry) {
            result.entries.push_back(std::move(*parsed.entry));
        } else {
            result.quarantined.push_back("line " + std::to_string(lineno) + ": " + parsed.error);
        }
    }
    return result;
}

}  // namespace hotpotato::persistence
