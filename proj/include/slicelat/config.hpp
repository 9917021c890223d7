#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "slicelat/matcher.hpp"
#include "slicelat/synth.hpp"

namespace slicelat {

/// Parsed `key = value` file with `[section]` headers. Keys are stored as
/// "section.key"; keys before the first header have no prefix.
class IniFile {
public:
    /// Throws Error{InvalidConfig} with the line number on syntax errors.
    static IniFile parse(std::string_view text);
    /// Throws Error{IoError} if unreadable.
    static IniFile load(const std::filesystem::path& path);

    [[nodiscard]] std::optional<std::string> get(const std::string& key) const;
    [[nodiscard]] const std::map<std::string, std::string>& entries() const noexcept { return entries_; }

private:
    std::map<std::string, std::string> entries_;
};

/// "10ms", "500us", "1 s", "250ns", or a bare integer of nanoseconds.
/// Throws Error{InvalidConfig}.
std::chrono::nanoseconds parse_duration(std::string_view text);

enum class Mode : std::uint8_t { Replay, Synth, Live };

struct ExperimentConfig {
    Mode mode = Mode::Replay;

    // selections
    std::vector<SliceKind> slices{SliceKind::eMBB, SliceKind::URLLC, SliceKind::mMTC};
    std::vector<LoadLevel> loads{LoadLevel::Light};
    std::string load_label = "unspecified";  // load column for replayed traces
    std::map<std::string, std::string> namespace_slice{
        {"upf1", "eMBB"}, {"upf2", "URLLC"}, {"upf3", "mMTC"}};

    std::vector<std::filesystem::path> inputs;
    std::filesystem::path out_dir = "out";

    MatcherConfig matcher;
    std::chrono::nanoseconds pfcp_timeout = std::chrono::seconds(1);
    bool include_retransmitted = false;

    // synth
    std::uint64_t seed = 42;
    std::optional<double> duration_s;
    ImpairmentModel impairments;
    RttModel rtt_model;
    std::optional<double> pfcp_rate;
    bool write_trace = false;

    // report
    std::size_t cdf_resolution = 200;

    // live
    std::filesystem::path probe_object;
    std::map<std::string, int> upf_pids;
    std::string n3_interface = "eth0";
    std::string tun_interface = "ogstun";
    std::filesystem::path tracing_dir = "/sys/kernel/tracing";
    unsigned trace_buffer_kb = 32 * 1024;

    /// Slice label for a namespace; the namespace itself when unmapped.
    [[nodiscard]] std::string slice_for(const std::string& ns) const;

    /// Throws Error{InvalidConfig}.
    void validate() const;

    /// Applies entries from a config file over the current values.
    void apply(const IniFile& ini);
};

std::string_view to_string(Mode m) noexcept;

}  // namespace slicelat
