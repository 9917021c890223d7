#pragma once

#include <atomic>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "slicelat/config.hpp"
#include "slicelat/error.hpp"

namespace slicelat {

/// Process exit status per error class.
enum class ExitCode : int {
    Ok = 0,
    Usage = 1,
    IoError = 2,
    SchemaError = 3,
    InvalidConfig = 4,
    SelfCheckFailed = 5,
    DataError = 6,
    PrivilegeError = 10,
    NamespaceNotFound = 11,
    InterfaceNotFound = 12,
    ProbeLoadError = 13,
};

[[nodiscard]] ExitCode exit_code_for(ErrorCode code) noexcept;

/// Set from a signal handler; ingestion loops stop at the next line and write
/// partial datasets.
std::atomic<bool>& interrupt_flag() noexcept;

/// Streams trace files (or "-" for stdin) through the matcher and PFCP
/// tracker. Writes pairs.csv, pfcp.csv, summary.txt and delay_stats.json to
/// config.out_dir.
ExitCode cmd_replay(const ExperimentConfig& config, std::ostream& out, std::ostream& err);

/// Runs generator -> matcher -> statistics for each selected load and checks
/// the matched pairs against the generator's ground truth. Writes pairs.csv,
/// ground_truth.csv, pfcp.csv, summary.txt, delay_stats.json and optionally
/// one trace_<Load>.txt per load.
ExitCode cmd_synth(const ExperimentConfig& config, std::ostream& out, std::ostream& err);

/// Aggregates pair / PFCP CSV datasets and prints per-group summaries; writes
/// delay_stats.json to config.out_dir.
ExitCode cmd_stats(const ExperimentConfig& config, std::ostream& out, std::ostream& err);

/// Writes report.md plus forwarding and PFCP CDF CSVs for each group.
ExitCode cmd_report(const ExperimentConfig& config, std::ostream& out, std::ostream& err);

/// Host interactions needed by live attach, separated so the command logic
/// runs without privileges in tests.
class AttachOps {
public:
    virtual ~AttachOps() = default;
    [[nodiscard]] virtual bool privileged() const = 0;
    [[nodiscard]] virtual bool namespace_exists(int pid) const = 0;
    [[nodiscard]] virtual bool probe_object_readable(const std::filesystem::path& object) const = 0;
    /// Interface index inside the network namespace of `pid`, resolved now.
    virtual std::optional<unsigned> interface_index(int pid, const std::string& ifname) = 0;
    virtual bool set_trace_buffer_kb(unsigned kb) = 0;
    /// Installs `section` of `object` as an ingress classifier on `ifname`.
    virtual bool attach_ingress(int pid, const std::string& ifname, const std::filesystem::path& object,
                                const std::string& section) = 0;
    virtual void detach_ingress(int pid, const std::string& ifname) = 0;
    /// Kernel trace stream; reads block until data or interruption.
    virtual std::unique_ptr<std::istream> open_trace_stream() = 0;
};

/// nsenter-style implementation: setns(2) into /proc/<pid>/ns/net and the
/// `tc` tool for classifier management.
std::unique_ptr<AttachOps> make_system_attach_ops(const ExperimentConfig& config);

/// For each UPF: enter its namespace, install m1_<upf> on the N3 interface
/// ingress and m3_<upf> on the TUN ingress (index re-resolved on every
/// attach), then stream kernel trace output through the replay pipeline until
/// EOF or interruption and detach.
ExitCode cmd_attach(const ExperimentConfig& config, AttachOps& ops, std::ostream& out, std::ostream& err);

}  // namespace slicelat
