#include <csignal>
#include <cstring>
#include <iostream>

#include "CLI11.hpp"
#include "slicelat/commands.hpp"

using namespace slicelat;

namespace {

extern "C" void on_signal(int) {
    interrupt_flag().store(true);
}

void install_signal_handlers() {
    struct sigaction sa;
    std::memset(&sa, 0, sizeof sa);
    sa.sa_handler = on_signal;
    sigemptyset(&sa.sa_mask);
    // No SA_RESTART: a blocked read on the trace pipe must return.
    sa.sa_flags = 0;
    sigaction(SIGINT, &sa, nullptr);
    sigaction(SIGTERM, &sa, nullptr);
}

struct Flags {
    std::string config_file;
    std::string window;
    std::string reorder_slack;
    std::size_t capacity = 0;
    std::uint64_t seed = 0;
    std::string out;
    std::string load;
    std::string loads;
    std::string slices;
    double duration = 0;
    double m1_loss = 0;
    double m3_loss = 0;
    double reorder_prob = 0;
    std::string reorder_jitter;
    double duplicate_prob = 0;
    double retransmit_prob = 0;
    double pfcp_rate = 0;
    std::string pfcp_timeout;
    bool write_trace = false;
    bool include_retransmitted = false;
    std::size_t cdf_resolution = 0;
    std::string probe_object;
    std::vector<std::string> pids;
    std::vector<std::string> inputs;
};

struct Options {
    CLI::Option* window = nullptr;
    CLI::Option* capacity = nullptr;
    CLI::Option* reorder_slack = nullptr;
    CLI::Option* seed = nullptr;
    CLI::Option* out = nullptr;
    CLI::Option* load = nullptr;
    CLI::Option* loads = nullptr;
    CLI::Option* slices = nullptr;
    CLI::Option* duration = nullptr;
    CLI::Option* m1_loss = nullptr;
    CLI::Option* m3_loss = nullptr;
    CLI::Option* reorder_prob = nullptr;
    CLI::Option* reorder_jitter = nullptr;
    CLI::Option* duplicate_prob = nullptr;
    CLI::Option* retransmit_prob = nullptr;
    CLI::Option* pfcp_rate = nullptr;
    CLI::Option* pfcp_timeout = nullptr;
    CLI::Option* write_trace = nullptr;
    CLI::Option* include_retransmitted = nullptr;
    CLI::Option* cdf_resolution = nullptr;
    CLI::Option* probe_object = nullptr;
    CLI::Option* pids = nullptr;
};

void add_common(CLI::App* sub, Flags& f, Options& o) {
    sub->add_option("--config", f.config_file, "INI config file; flags override it");
    o.window = sub->add_option("--window", f.window, "match window, e.g. 10ms");
    o.capacity = sub->add_option("--capacity", f.capacity, "M1 buffer entries per namespace");
    o.reorder_slack = sub->add_option("--reorder-slack", f.reorder_slack, "tolerated M3-before-M1 skew");
    o.seed = sub->add_option("--seed", f.seed, "generator seed");
    o.out = sub->add_option("--out", f.out, "output directory");
    o.pfcp_timeout = sub->add_option("--pfcp-timeout", f.pfcp_timeout, "PFCP request loss timeout");
}

void apply_flags(ExperimentConfig& cfg, const Flags& f, const Options& o) {
    auto given = [](const CLI::Option* opt) { return opt != nullptr && opt->count() > 0; };
    auto list_ini = [](const std::string& key, const std::string& value) {
        return IniFile::parse("[experiment]\n" + key + " = " + value + "\n");
    };
    if (given(o.window)) cfg.matcher.window = parse_duration(f.window);
    if (given(o.capacity)) cfg.matcher.capacity = f.capacity;
    if (given(o.reorder_slack)) cfg.matcher.reorder_slack = parse_duration(f.reorder_slack);
    if (given(o.seed)) cfg.seed = f.seed;
    if (given(o.out)) cfg.out_dir = f.out;
    if (given(o.pfcp_timeout)) cfg.pfcp_timeout = parse_duration(f.pfcp_timeout);
    if (given(o.load)) cfg.load_label = f.load;
    if (given(o.loads)) cfg.apply(list_ini("loads", f.loads));
    if (given(o.slices)) cfg.apply(list_ini("slices", f.slices));
    if (given(o.duration)) cfg.duration_s = f.duration;
    if (given(o.m1_loss)) cfg.impairments.m1_loss_prob = f.m1_loss;
    if (given(o.m3_loss)) cfg.impairments.m3_loss_prob = f.m3_loss;
    if (given(o.reorder_prob)) cfg.impairments.reorder_prob = f.reorder_prob;
    if (given(o.reorder_jitter)) cfg.impairments.reorder_jitter = parse_duration(f.reorder_jitter);
    if (given(o.duplicate_prob)) cfg.impairments.duplicate_prob = f.duplicate_prob;
    if (given(o.retransmit_prob)) cfg.rtt_model.retransmit_prob = f.retransmit_prob;
    if (given(o.pfcp_rate)) cfg.pfcp_rate = f.pfcp_rate;
    if (given(o.write_trace)) cfg.write_trace = f.write_trace;
    if (given(o.include_retransmitted)) cfg.include_retransmitted = f.include_retransmitted;
    if (given(o.cdf_resolution)) cfg.cdf_resolution = f.cdf_resolution;
    if (given(o.probe_object)) cfg.probe_object = f.probe_object;
    if (given(o.pids)) {
        cfg.upf_pids.clear();
        for (const auto& item : f.pids) {
            const auto eq = item.find('=');
            if (eq == std::string::npos || eq == 0) {
                throw Error(ErrorCode::InvalidConfig, "--pid expects UPF=PID, got '" + item + "'");
            }
            cfg.apply(IniFile::parse("[attach.pids]\n" + item.substr(0, eq) + " = " + item.substr(eq + 1) + "\n"));
        }
    }
    if (!f.inputs.empty()) {
        cfg.inputs.assign(f.inputs.begin(), f.inputs.end());
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Per-slice UPF forwarding and N4 latency measurement"};
    app.require_subcommand(1);
    Flags f;

    Options replay_o, synth_o, stats_o, report_o, attach_o;

    auto* replay = app.add_subcommand("replay", "match a recorded probe trace");
    add_common(replay, f, replay_o);
    replay_o.load = replay->add_option("--load", f.load, "load label for the output rows");
    replay->add_option("traces", f.inputs, "trace files, '-' for stdin")->required();

    auto* synth = app.add_subcommand("synth", "generate, match and self-check synthetic traffic");
    add_common(synth, f, synth_o);
    synth_o.loads = synth->add_option("--loads", f.loads, "comma list of Light,Medium,Heavy");
    synth_o.slices = synth->add_option("--slices", f.slices, "comma list of eMBB,URLLC,mMTC");
    synth_o.duration = synth->add_option("--duration", f.duration, "seconds per load (default 600)");
    synth_o.m1_loss = synth->add_option("--m1-loss", f.m1_loss, "M1 loss probability");
    synth_o.m3_loss = synth->add_option("--m3-loss", f.m3_loss, "M3 loss probability");
    synth_o.reorder_prob = synth->add_option("--reorder-prob", f.reorder_prob, "reorder probability");
    synth_o.reorder_jitter = synth->add_option("--reorder-jitter", f.reorder_jitter, "reorder offset bound");
    synth_o.duplicate_prob = synth->add_option("--duplicate-prob", f.duplicate_prob, "duplicate probability");
    synth_o.retransmit_prob = synth->add_option("--retransmit-prob", f.retransmit_prob, "PFCP retransmission probability");
    synth_o.pfcp_rate = synth->add_option("--pfcp-rate", f.pfcp_rate, "PFCP transactions per second");
    synth_o.write_trace = synth->add_flag("--write-trace", f.write_trace, "also write trace_<Load>.txt per load");

    auto* stats = app.add_subcommand("stats", "summarise pair and PFCP datasets");
    add_common(stats, f, stats_o);
    stats_o.include_retransmitted =
        stats->add_flag("--include-retransmitted", f.include_retransmitted, "keep retransmitted PFCP RTTs");
    stats->add_option("datasets", f.inputs, "pairs.csv / pfcp.csv files")->required();

    auto* report = app.add_subcommand("report", "render report.md and CDF files");
    add_common(report, f, report_o);
    report_o.include_retransmitted =
        report->add_flag("--include-retransmitted", f.include_retransmitted, "keep retransmitted PFCP RTTs");
    report_o.cdf_resolution = report->add_option("--cdf-points", f.cdf_resolution, "points per CDF file");
    report->add_option("datasets", f.inputs, "pairs.csv / pfcp.csv files")->required();

    auto* attach = app.add_subcommand("attach", "install probes in UPF namespaces and stream live");
    add_common(attach, f, attach_o);
    attach_o.load = attach->add_option("--load", f.load, "load label for the output rows");
    attach_o.probe_object = attach->add_option("--object", f.probe_object, "compiled probe object");
    attach_o.pids = attach->add_option("--pid", f.pids, "UPF=PID, repeatable");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return static_cast<int>(ExitCode::Usage);
    }

    ExperimentConfig cfg;
    const Options* opts = nullptr;
    if (replay->parsed()) {
        cfg.mode = Mode::Replay;
        opts = &replay_o;
    } else if (synth->parsed()) {
        cfg.mode = Mode::Synth;
        opts = &synth_o;
    } else if (stats->parsed()) {
        opts = &stats_o;
    } else if (report->parsed()) {
        opts = &report_o;
    } else {
        cfg.mode = Mode::Live;
        opts = &attach_o;
    }

    try {
        if (!f.config_file.empty()) {
            cfg.apply(IniFile::load(f.config_file));
        }
        apply_flags(cfg, f, *opts);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(exit_code_for(e.code()));
    }

    install_signal_handlers();
    ExitCode code;
    if (replay->parsed()) {
        code = cmd_replay(cfg, std::cout, std::cerr);
    } else if (synth->parsed()) {
        code = cmd_synth(cfg, std::cout, std::cerr);
    } else if (stats->parsed()) {
        code = cmd_stats(cfg, std::cout, std::cerr);
    } else if (report->parsed()) {
        code = cmd_report(cfg, std::cout, std::cerr);
    } else {
        auto ops = make_system_attach_ops(cfg);
        code = cmd_attach(cfg, *ops, std::cout, std::cerr);
    }
    return static_cast<int>(code);
}
