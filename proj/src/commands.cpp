#include "slicelat/commands.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "slicelat/dataset.hpp"
#include "slicelat/pipeline.hpp"
#include "slicelat/report.hpp"
#include "slicelat/stats_json.hpp"
#include "slicelat/synth.hpp"

namespace slicelat {

namespace fs = std::filesystem;

namespace {

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot write " + path.string());
    }
    return out;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
    }
}

void close_checked(std::ofstream& out, const fs::path& path) {
    out.close();
    if (!out) {
        throw Error(ErrorCode::IoError, "write failed for " + path.string());
    }
}

std::string file_label(std::string_view label) {
    std::string out;
    for (char c : label) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                        c == '-' || c == '.';
        out.push_back(ok ? c : '_');
    }
    return out;
}

void write_stats_json(const fs::path& path, const ForwardingStats& fwd, const PfcpStats& pfcp) {
    auto out = open_output(path);
    out << datasets_to_json(fwd, pfcp).dump(1) << '\n';
    close_checked(out, path);
}

// Order-independent fingerprint of a pair multiset.
struct PairDigest {
    std::uint64_t count = 0;
    std::uint64_t sum = 0;
    std::uint64_t xored = 0;

    void add(const MatchedPair& p) {
        std::uint64_t h = std::hash<std::string>{}(p.ns);
        for (std::uint64_t word : {std::uint64_t{p.teid}, p.flow_key.digest, p.t_m1, p.t_m3}) {
            h ^= word + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
            h = (h ^ (h >> 31)) * 0xbf58476d1ce4e5b9ULL;
        }
        ++count;
        sum += h;
        xored ^= h * 0x94d049bb133111ebULL;
    }
    friend bool operator==(const PairDigest&, const PairDigest&) = default;
};

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t x = seed ^ (salt * 0x9e3779b97f4a7c15ULL);
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

bool zero_impairments(const ImpairmentModel& m) {
    return m.m1_loss_prob == 0 && m.m3_loss_prob == 0 && m.duplicate_prob == 0 &&
           (m.reorder_prob == 0 || m.reorder_jitter.count() == 0);
}

void print_accounting(std::ostream& out, const MatchAccounting& a, const PfcpAccounting& p) {
    char rate[32];
    std::snprintf(rate, sizeof rate, "%.6f", a.match_rate());
    out << "events: m1=" << a.m1_total << " m3=" << a.m3_total << " malformed=" << a.malformed << '\n'
        << "matched=" << a.matched << " evicted=" << a.m1_evicted << " expired=" << a.m1_expired
        << " orphaned=" << a.m3_orphaned << " pending_m1=" << a.pending_m1 << " pending_m3=" << a.pending_m3
        << '\n'
        << "match_rate=" << rate << " conservation=" << (a.conserved() ? "ok" : "VIOLATED") << '\n'
        << "pfcp: transactions=" << p.transactions << " retransmissions=" << p.retransmissions
        << " orphans=" << p.orphans << " lost=" << p.lost << " pending=" << p.pending << '\n';
}

void merge_into(ForwardingStats& into, const ForwardingStats& from) {
    for (const auto& [key, stats] : from) {
        auto [it, inserted] = into.try_emplace(key, stats.layout());
        it->second.merge(stats);
    }
}

struct Aggregate {
    ForwardingStats forwarding;
    PfcpStats pfcp;
};

Aggregate aggregate_datasets(const ExperimentConfig& config) {
    if (config.inputs.empty()) {
        throw Error(ErrorCode::InvalidConfig, "no dataset inputs given");
    }
    Aggregate agg;
    for (const auto& path : config.inputs) {
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            throw Error(ErrorCode::IoError, "cannot read " + path.string());
        }
        if (in.peek() == std::char_traits<char>::eof()) {
            continue;
        }
        try {
            switch (read_csv_header(in)) {
                case CsvKind::Pairs:
                    for_each_pair_row(in, [&](const PairRow& row) {
                        agg.forwarding[{row.slice, row.load}].observe(row.pair.delay);
                    });
                    break;
                case CsvKind::Pfcp:
                    for_each_pfcp_row(in, [&](const PfcpRow& row) {
                        if (feeds_statistics(row.txn, config.include_retransmitted)) {
                            agg.pfcp[{std::string(to_string(row.txn.msg_class)), row.load}].observe(row.txn.rtt);
                        }
                    });
                    break;
            }
        } catch (const Error& e) {
            throw Error(e.code(), path.string() + ": " + e.what());
        }
    }
    return agg;
}

template <typename Fn>
ExitCode guarded(std::ostream& err, Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return ExitCode::IoError;
    }
}

}  // namespace

ExitCode exit_code_for(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::IoError: return ExitCode::IoError;
        case ErrorCode::SchemaError: return ExitCode::SchemaError;
        case ErrorCode::InvalidConfig:
        case ErrorCode::InvalidProfile: return ExitCode::InvalidConfig;
        case ErrorCode::PrivilegeError: return ExitCode::PrivilegeError;
        case ErrorCode::NamespaceNotFound: return ExitCode::NamespaceNotFound;
        case ErrorCode::InterfaceNotFound: return ExitCode::InterfaceNotFound;
        case ErrorCode::ProbeLoadError: return ExitCode::ProbeLoadError;
        default: return ExitCode::DataError;
    }
}

std::atomic<bool>& interrupt_flag() noexcept {
    static std::atomic<bool> flag{false};
    return flag;
}

namespace {

struct ReplayOutputs {
    fs::path dir;
    std::ofstream pairs;
    std::ofstream pfcp;

    explicit ReplayOutputs(const fs::path& out_dir) : dir(out_dir) {
        ensure_dir(dir);
        pairs = open_output(dir / "pairs.csv");
        pfcp = open_output(dir / "pfcp.csv");
        pairs << kPairCsvHeader << '\n';
        pfcp << kPfcpCsvHeader << '\n';
    }

    void finish(const ReplayPipeline& pipeline) {
        close_checked(pairs, dir / "pairs.csv");
        close_checked(pfcp, dir / "pfcp.csv");
        auto summary = open_output(dir / "summary.txt");
        write_summary(summary, pipeline.accounting(), pipeline.pfcp_accounting());
        close_checked(summary, dir / "summary.txt");
        write_stats_json(dir / "delay_stats.json", pipeline.forwarding_stats(), pipeline.pfcp_stats());
    }
};

// Returns false when interrupted.
bool pump_lines(std::istream& in, ReplayPipeline& pipeline) {
    std::string line;
    while (!interrupt_flag().load(std::memory_order_relaxed) && std::getline(in, line)) {
        pipeline.feed_line(line);
    }
    return !interrupt_flag().load(std::memory_order_relaxed);
}

}  // namespace

ExitCode cmd_replay(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        config.validate();
        if (config.inputs.empty()) {
            throw Error(ErrorCode::InvalidConfig, "replay needs at least one trace file");
        }
        // Every input must be readable before any output is produced.
        std::vector<std::ifstream> files;
        for (const auto& path : config.inputs) {
            if (path == "-") {
                files.emplace_back();
                continue;
            }
            std::ifstream in(path, std::ios::binary);
            if (!in) {
                throw Error(ErrorCode::IoError, "cannot read trace " + path.string());
            }
            files.push_back(std::move(in));
        }

        ReplayOutputs outputs(config.out_dir);
        ReplayPipeline pipeline(config, config.load_label, &outputs.pairs, &outputs.pfcp);
        bool completed = true;
        for (std::size_t i = 0; i < files.size() && completed; ++i) {
            std::istream& in = config.inputs[i] == "-" ? std::cin : files[i];
            completed = pump_lines(in, pipeline);
            if (in.bad()) {
                throw Error(ErrorCode::IoError, "read error on " + config.inputs[i].string());
            }
        }
        pipeline.finish();
        outputs.finish(pipeline);
        if (!completed) {
            err << "interrupted: partial datasets written\n";
        }
        out << "lines=" << pipeline.lines_seen() << '\n';
        print_accounting(out, pipeline.accounting(), pipeline.pfcp_accounting());
        return ExitCode::Ok;
    });
}

ExitCode cmd_synth(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        config.validate();
        ensure_dir(config.out_dir);
        auto pairs = open_output(config.out_dir / "pairs.csv");
        auto truth = open_output(config.out_dir / "ground_truth.csv");
        auto pfcp = open_output(config.out_dir / "pfcp.csv");
        pairs << kPairCsvHeader << '\n';
        truth << kPairCsvHeader << '\n';
        pfcp << kPfcpCsvHeader << '\n';

        MatchAccounting total_fwd;
        PfcpAccounting total_pfcp;
        ForwardingStats all_fwd;
        PfcpStats all_pfcp;
        bool diverged = false;

        for (LoadLevel level : config.loads) {
            LoadCondition load = LoadCondition::standard(level);
            if (config.duration_s) {
                load.duration_s = *config.duration_s;
            }
            const std::string load_name(to_string(level));
            std::vector<SyntheticStream> streams;
            for (SliceKind slice : config.slices) {
                const auto salt = static_cast<std::uint64_t>(level) * 16 + static_cast<std::uint64_t>(slice);
                auto profile = default_profile(slice, load);
                for (const auto& [ns, label] : config.namespace_slice) {
                    if (label == to_string(slice)) {
                        profile.ns = ns;
                        break;
                    }
                }
                streams.emplace_back(profile, load, config.impairments, derive_seed(config.seed, salt));
            }
            MergedStream merged(std::move(streams));
            const double rate = config.pfcp_rate.value_or(default_pfcp_rate(level));
            const auto pfcp_trace = generate_pfcp(load, config.rtt_model, rate,
                                                  derive_seed(config.seed, 0x100 + static_cast<std::uint64_t>(level)));

            const fs::path trace_path = config.out_dir / ("trace_" + load_name + ".txt");
            std::ofstream trace;
            if (config.write_trace) {
                trace = open_output(trace_path);
            }
            ReplayPipeline pipeline(config, load_name, &pairs, &pfcp);
            PairDigest matched_digest;
            PairDigest truth_digest;
            pipeline.on_pair = [&](const MatchedPair& p) { matched_digest.add(p); };

            auto drain_truth = [&] {
                for (const auto& p : merged.take_ground_truth()) {
                    truth << format_pair_row(config.slice_for(p.ns), load_name, p) << '\n';
                    truth_digest.add(p);
                }
            };
            auto feed = [&](const ProbeEvent& ev) {
                if (config.write_trace) {
                    trace << emit_trace_line(ev) << '\n';
                }
                pipeline.feed_event(ev);
            };

            std::size_t next_pfcp = 0;
            bool interrupted = false;
            while (auto item = merged.next()) {
                while (next_pfcp < pfcp_trace.events.size() &&
                       pfcp_trace.events[next_pfcp].timestamp_ns <= item->order_key) {
                    feed(pfcp_trace.events[next_pfcp++]);
                }
                feed(item->event);
                drain_truth();
                if (interrupt_flag().load(std::memory_order_relaxed)) {
                    interrupted = true;
                    break;
                }
            }
            while (!interrupted && next_pfcp < pfcp_trace.events.size()) {
                feed(pfcp_trace.events[next_pfcp++]);
            }
            drain_truth();
            pipeline.finish();
            if (config.write_trace) {
                close_checked(trace, trace_path);
            }

            const auto acct = pipeline.accounting();
            const bool agree = matched_digest == truth_digest;
            out << "[" << load_name << "] ";
            print_accounting(out, acct, pipeline.pfcp_accounting());
            out << "[" << load_name << "] self-check: "
                << (agree ? "OK" : "DIVERGED") << " (ground_truth=" << truth_digest.count
                << " matched=" << matched_digest.count << ")\n";
            if (!agree && zero_impairments(config.impairments)) {
                diverged = true;
            }
            total_fwd += acct;
            const auto pa = pipeline.pfcp_accounting();
            total_pfcp.sends += pa.sends;
            total_pfcp.retransmissions += pa.retransmissions;
            total_pfcp.recvs += pa.recvs;
            total_pfcp.transactions += pa.transactions;
            total_pfcp.orphans += pa.orphans;
            total_pfcp.lost += pa.lost;
            total_pfcp.pending += pa.pending;
            merge_into(all_fwd, pipeline.forwarding_stats());
            merge_into(all_pfcp, pipeline.pfcp_stats());
            if (interrupted) {
                err << "interrupted: partial datasets written\n";
                break;
            }
        }

        close_checked(pairs, config.out_dir / "pairs.csv");
        close_checked(truth, config.out_dir / "ground_truth.csv");
        close_checked(pfcp, config.out_dir / "pfcp.csv");
        auto summary = open_output(config.out_dir / "summary.txt");
        write_summary(summary, total_fwd, total_pfcp);
        close_checked(summary, config.out_dir / "summary.txt");
        write_stats_json(config.out_dir / "delay_stats.json", all_fwd, all_pfcp);

        if (diverged) {
            err << "self-check failed: matcher output differs from ground truth on a lossless run\n";
            return ExitCode::SelfCheckFailed;
        }
        return ExitCode::Ok;
    });
}

ExitCode cmd_stats(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        config.validate();
        const Aggregate agg = aggregate_datasets(config);
        auto line = [&](const std::string& group, const std::string& load, const DelayStats& s) {
            out << group << ' ' << load << " N=" << s.count();
            if (s.count() > 0) {
                out << " mean_us=" << to_whole_us(static_cast<std::uint64_t>(s.mean() + 0.5))
                    << " p50_us=" << to_whole_us(s.quantile(0.5)) << " p99_us=" << to_whole_us(s.quantile(0.99))
                    << " max_us=" << to_whole_us(s.max());
            }
            out << '\n';
        };
        for (const auto& [key, s] : agg.forwarding) {
            line(key.first, key.second, s);
        }
        for (const auto& [key, s] : agg.pfcp) {
            line("pfcp:" + key.first, key.second, s);
        }
        ensure_dir(config.out_dir);
        write_stats_json(config.out_dir / "delay_stats.json", agg.forwarding, agg.pfcp);
        return ExitCode::Ok;
    });
}

ExitCode cmd_report(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        config.validate();
        const Aggregate agg = aggregate_datasets(config);
        ensure_dir(config.out_dir);

        const fs::path md_path = config.out_dir / "report.md";
        auto md = open_output(md_path);
        md << "# Forwarding and N4 latency report\n\n"
           << "### Per-slice N3 to N6 forwarding delay\n\n"
           << render_forwarding_table(agg.forwarding) << '\n'
           << "### N4 PFCP session latency\n\n"
           << render_pfcp_tables(agg.pfcp) << '\n'
           << "PFCP CDF files carry the " << to_whole_us(kOrchestrationBudgetNs)
           << " µs orchestration budget as reference-line metadata.\n";
        close_checked(md, md_path);

        std::size_t files = 1;
        for (const auto& [key, stats] : agg.forwarding) {
            const fs::path path =
                config.out_dir / ("cdf_" + file_label(key.first) + "_" + file_label(key.second) + ".csv");
            auto csv = open_output(path);
            write_cdf_csv(csv, stats, config.cdf_resolution);
            close_checked(csv, path);
            ++files;
        }
        for (const auto& [key, stats] : agg.pfcp) {
            const fs::path path =
                config.out_dir / ("pfcp_cdf_" + file_label(key.first) + "_" + file_label(key.second) + ".csv");
            auto csv = open_output(path);
            write_cdf_csv(csv, stats, config.cdf_resolution,
                          "reference_budget_ns=" + std::to_string(kOrchestrationBudgetNs));
            close_checked(csv, path);
            ++files;
        }
        out << "wrote " << files << " report files to " << config.out_dir.string() << '\n';
        return ExitCode::Ok;
    });
}

ExitCode cmd_attach(const ExperimentConfig& config, AttachOps& ops, std::ostream& out, std::ostream& err) {
    struct Attached {
        int pid;
        std::string ifname;
    };
    std::vector<Attached> attached;
    auto detach_all = [&] {
        for (auto it = attached.rbegin(); it != attached.rend(); ++it) {
            ops.detach_ingress(it->pid, it->ifname);
        }
        attached.clear();
    };

    const ExitCode code = guarded(err, [&] {
        ExperimentConfig live = config;
        live.mode = Mode::Live;
        live.validate();
        if (!ops.privileged()) {
            throw Error(ErrorCode::PrivilegeError, "attaching classifiers requires CAP_NET_ADMIN and CAP_SYS_ADMIN");
        }
        for (const auto& [upf, pid] : live.upf_pids) {
            if (!ops.namespace_exists(pid)) {
                throw Error(ErrorCode::NamespaceNotFound,
                            "no network namespace for " + upf + " (pid " + std::to_string(pid) + ")");
            }
        }
        if (!ops.probe_object_readable(live.probe_object)) {
            throw Error(ErrorCode::ProbeLoadError, "cannot read probe object " + live.probe_object.string());
        }
        if (!ops.set_trace_buffer_kb(live.trace_buffer_kb)) {
            throw Error(ErrorCode::ProbeLoadError, "cannot size the kernel trace buffer");
        }
        for (const auto& [upf, pid] : live.upf_pids) {
            // The TUN index changes whenever the UPF restarts; never cache it.
            for (const auto& ifname : {live.n3_interface, live.tun_interface}) {
                const auto index = ops.interface_index(pid, ifname);
                if (!index) {
                    throw Error(ErrorCode::InterfaceNotFound, ifname + " not present in namespace of " + upf);
                }
                out << upf << ": " << ifname << " ifindex " << *index << '\n';
            }
            const std::pair<const std::string&, std::string> hooks[] = {
                {live.n3_interface, "m1_" + upf}, {live.tun_interface, "m3_" + upf}};
            for (const auto& [ifname, section] : hooks) {
                if (!ops.attach_ingress(pid, ifname, live.probe_object, section)) {
                    throw Error(ErrorCode::ProbeLoadError, "failed to attach " + section + " on " + ifname);
                }
                attached.push_back({pid, ifname});
            }
        }

        auto stream = ops.open_trace_stream();
        if (!stream) {
            throw Error(ErrorCode::IoError, "cannot open the kernel trace stream");
        }
        ReplayOutputs outputs(live.out_dir);
        ReplayPipeline pipeline(live, live.load_label, &outputs.pairs, &outputs.pfcp);
        out << "streaming; interrupt to stop\n";
        const bool completed = pump_lines(*stream, pipeline);
        detach_all();
        pipeline.finish();
        outputs.finish(pipeline);
        if (!completed) {
            err << "interrupted: partial datasets written\n";
        }
        print_accounting(out, pipeline.accounting(), pipeline.pfcp_accounting());
        return ExitCode::Ok;
    });
    detach_all();
    return code;
}

}  // namespace slicelat
