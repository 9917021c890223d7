#include "slicelat/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "slicelat/error.hpp"

namespace slicelat {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string> split_list(std::string_view text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const auto item = trim(text.substr(start, comma == std::string_view::npos ? text.size() - start
                                                                                : comma - start));
        if (!item.empty()) {
            out.emplace_back(item);
        }
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
    throw Error(ErrorCode::InvalidConfig, "bad value '" + value + "' for " + key);
}

double to_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double d = std::stod(value, &used);
        if (used != value.size()) {
            bad_value(key, value);
        }
        return d;
    } catch (const std::logic_error&) {
        bad_value(key, value);
    }
}

template <typename T>
T to_integer(const std::string& key, const std::string& value) {
    T out{};
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (value.empty() || ec != std::errc{} || ptr != value.data() + value.size()) {
        bad_value(key, value);
    }
    return out;
}

bool to_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "yes" || value == "1" || value == "on") {
        return true;
    }
    if (value == "false" || value == "no" || value == "0" || value == "off") {
        return false;
    }
    bad_value(key, value);
}

}  // namespace

IniFile IniFile::parse(std::string_view text) {
    IniFile ini;
    std::string section;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        auto line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        line = trim(line);
        if (line.empty() || line.front() == '#' || line.front() == ';') {
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(line_no) + ": bad section header");
            }
            section = std::string(trim(line.substr(1, line.size() - 2)));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(line_no) + ": expected key = value");
        }
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(line_no) + ": empty key");
        }
        ini.entries_[section.empty() ? std::string(key) : section + "." + std::string(key)] = std::string(value);
    }
    return ini;
}

IniFile IniFile::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot read config " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

std::optional<std::string> IniFile::get(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::chrono::nanoseconds parse_duration(std::string_view text) {
    text = trim(text);
    std::size_t digits = 0;
    while (digits < text.size() && (std::isdigit(static_cast<unsigned char>(text[digits])) || text[digits] == '.')) {
        ++digits;
    }
    const auto number = text.substr(0, digits);
    const auto unit = trim(text.substr(digits));
    double scale = 0;
    if (unit.empty() || unit == "ns") {
        scale = 1;
    } else if (unit == "us") {
        scale = 1e3;
    } else if (unit == "ms") {
        scale = 1e6;
    } else if (unit == "s") {
        scale = 1e9;
    }
    double value = 0;
    const auto [ptr, ec] = std::from_chars(number.data(), number.data() + number.size(), value);
    if (number.empty() || scale == 0 || ec != std::errc{} || ptr != number.data() + number.size()) {
        throw Error(ErrorCode::InvalidConfig, "bad duration '" + std::string(text) + "'");
    }
    return std::chrono::nanoseconds(static_cast<std::int64_t>(value * scale + 0.5));
}

std::string_view to_string(Mode m) noexcept {
    switch (m) {
        case Mode::Replay: return "replay";
        case Mode::Synth: return "synth";
        case Mode::Live: return "live";
    }
    return "?";
}

std::string ExperimentConfig::slice_for(const std::string& ns) const {
    auto it = namespace_slice.find(ns);
    return it == namespace_slice.end() ? ns : it->second;
}

void ExperimentConfig::validate() const {
    matcher.validate();
    impairments.validate();
    rtt_model.validate();
    if (slices.empty() || loads.empty()) {
        throw Error(ErrorCode::InvalidConfig, "at least one slice and one load must be selected");
    }
    if (duration_s && !(*duration_s >= 0)) {
        throw Error(ErrorCode::InvalidConfig, "duration must be non-negative");
    }
    if (pfcp_rate && !(*pfcp_rate >= 0)) {
        throw Error(ErrorCode::InvalidConfig, "PFCP rate must be non-negative");
    }
    if (cdf_resolution == 0) {
        throw Error(ErrorCode::InvalidConfig, "cdf_resolution must be positive");
    }
    if (pfcp_timeout.count() <= 0) {
        throw Error(ErrorCode::InvalidConfig, "PFCP timeout must be positive");
    }
    if (load_label.empty() || load_label.find(',') != std::string::npos) {
        throw Error(ErrorCode::InvalidConfig, "load label must be non-empty and comma-free");
    }
    for (const auto& [ns, slice] : namespace_slice) {
        if (!valid_namespace_id(ns) || slice.empty() || slice.find(',') != std::string::npos) {
            throw Error(ErrorCode::InvalidConfig, "bad namespace mapping " + ns + " = " + slice);
        }
    }
    if (mode == Mode::Live) {
        if (probe_object.empty()) {
            throw Error(ErrorCode::InvalidConfig, "live mode needs a probe object path");
        }
        if (upf_pids.empty()) {
            throw Error(ErrorCode::InvalidConfig, "live mode needs at least one UPF process id");
        }
        for (const auto& [ns, pid] : upf_pids) {
            if (!valid_namespace_id(ns) || pid <= 0) {
                throw Error(ErrorCode::InvalidConfig, "bad UPF process id for " + ns);
            }
        }
    }
}

void ExperimentConfig::apply(const IniFile& ini) {
    for (const auto& [key, value] : ini.entries()) {
        if (key == "experiment.mode") {
            if (value == "replay") mode = Mode::Replay;
            else if (value == "synth") mode = Mode::Synth;
            else if (value == "live") mode = Mode::Live;
            else bad_value(key, value);
        } else if (key == "experiment.seed") {
            seed = to_integer<std::uint64_t>(key, value);
        } else if (key == "experiment.out") {
            out_dir = value;
        } else if (key == "experiment.load") {
            load_label = value;
        } else if (key == "experiment.loads") {
            loads.clear();
            for (const auto& item : split_list(value)) {
                const auto level = load_from_string(item);
                if (!level) bad_value(key, value);
                loads.push_back(*level);
            }
        } else if (key == "experiment.slices") {
            slices.clear();
            for (const auto& item : split_list(value)) {
                const auto slice = slice_from_string(item);
                if (!slice) bad_value(key, value);
                slices.push_back(*slice);
            }
        } else if (key == "experiment.duration") {
            duration_s = to_double(key, value);
        } else if (key == "experiment.inputs") {
            inputs.clear();
            for (const auto& item : split_list(value)) {
                inputs.emplace_back(item);
            }
        } else if (key == "experiment.include_retransmitted") {
            include_retransmitted = to_bool(key, value);
        } else if (key == "experiment.cdf_resolution") {
            cdf_resolution = to_integer<std::size_t>(key, value);
        } else if (key == "experiment.write_trace") {
            write_trace = to_bool(key, value);
        } else if (key == "matcher.window") {
            matcher.window = parse_duration(value);
        } else if (key == "matcher.capacity") {
            matcher.capacity = to_integer<std::size_t>(key, value);
        } else if (key == "matcher.reorder_slack") {
            matcher.reorder_slack = parse_duration(value);
        } else if (key == "pfcp.timeout") {
            pfcp_timeout = parse_duration(value);
        } else if (key == "pfcp.rate") {
            pfcp_rate = to_double(key, value);
        } else if (key == "pfcp.rtt_mean") {
            rtt_model.mean_ns = static_cast<double>(parse_duration(value).count());
        } else if (key == "pfcp.rtt_sigma") {
            rtt_model.sigma = to_double(key, value);
        } else if (key == "pfcp.retransmit_prob") {
            rtt_model.retransmit_prob = to_double(key, value);
        } else if (key == "pfcp.establishment_fraction") {
            rtt_model.establishment_fraction = to_double(key, value);
        } else if (key == "impairments.m1_loss") {
            impairments.m1_loss_prob = to_double(key, value);
        } else if (key == "impairments.m3_loss") {
            impairments.m3_loss_prob = to_double(key, value);
        } else if (key == "impairments.reorder_prob") {
            impairments.reorder_prob = to_double(key, value);
        } else if (key == "impairments.reorder_jitter") {
            impairments.reorder_jitter = parse_duration(value);
        } else if (key == "impairments.duplicate_prob") {
            impairments.duplicate_prob = to_double(key, value);
        } else if (key.rfind("namespaces.", 0) == 0) {
            namespace_slice[key.substr(11)] = value;
        } else if (key == "attach.probe_object") {
            probe_object = value;
        } else if (key == "attach.n3_interface") {
            n3_interface = value;
        } else if (key == "attach.tun_interface") {
            tun_interface = value;
        } else if (key == "attach.tracing_dir") {
            tracing_dir = value;
        } else if (key == "attach.trace_buffer_kb") {
            trace_buffer_kb = to_integer<unsigned>(key, value);
        } else if (key.rfind("attach.pids.", 0) == 0) {
            upf_pids[key.substr(12)] = to_integer<int>(key, value);
        } else {
            throw Error(ErrorCode::InvalidConfig, "unknown config key '" + key + "'");
        }
    }
}

}  // namespace slicelat
