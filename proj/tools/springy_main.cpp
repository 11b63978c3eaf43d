// Command-line front end. Talks to the engine exclusively through the C API
// in springy/billiards.h.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "springy/billiards.h"

namespace {

struct CommonFlags {
    std::string config;
    std::string geometry;
    std::string model;
    std::string out;
    long seed = -1;
    int workers = -1;
    double m = -1.0;
    double eb0 = -1.0;
    double t_end = -1.0;
    double dt = -1.0;
    int particles = -1;
    int runs = -1;
    bool emit_plots = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config, "run configuration file");
    cmd->add_option("--geometry", f.geometry, "rob|stadium|mushroom")
        ->check(CLI::IsMember({"rob", "stadium", "mushroom"}));
    cmd->add_option("--model", f.model, "billiard|reduced")
        ->check(CLI::IsMember({"billiard", "reduced"}));
    cmd->add_option("--seed", f.seed, "base RNG seed");
    cmd->add_option("--workers", f.workers, "worker threads (0 = hardware)");
    cmd->add_option("--m", f.m, "particle/bar mass ratio");
    cmd->add_option("--particles", f.particles, "ensemble size");
    cmd->add_option("--eb0", f.eb0, "initial bar energy fraction");
    cmd->add_option("--t-end", f.t_end, "simulated time span");
    cmd->add_option("--dt", f.dt, "sampling interval");
    cmd->add_option("--runs", f.runs, "independent repetitions");
    cmd->add_flag("--emit-plots", f.emit_plots, "also write SVG plots");
}

[[noreturn]] void die(int code, const std::string& msg) {
    std::fprintf(stderr, "springy: %s\n", msg.c_str());
    std::exit(code);
}

int status_to_exit(sb_status st) {
    if (st == SB_OK) return 0;
    return st == SB_ERROR_CONFIG ? 2 : 3;
}

sb_config* build_config(const CommonFlags& f) {
    char err[512] = {0};
    sb_config* cfg = nullptr;
    if (!f.config.empty()) {
        cfg = sb_config_load(f.config.c_str(), err, sizeof err);
        if (!cfg) die(2, err);
        // a geometry flag on top of a config file rebuilds the geometry block
        if (!f.geometry.empty() &&
            sb_config_set(cfg, "geometry.kind", f.geometry.c_str(), err, sizeof err) !=
                SB_OK)
            die(2, err);
    } else {
        cfg = sb_config_create(f.geometry.empty() ? "rob" : f.geometry.c_str());
        if (!cfg) die(2, "unknown geometry kind");
    }
    auto set = [&](const char* key, const std::string& value) {
        if (sb_config_set(cfg, key, value.c_str(), err, sizeof err) != SB_OK)
            die(2, err);
    };
    if (!f.model.empty()) set("ensemble.model", f.model);
    if (f.seed >= 0) set("ensemble.seed", std::to_string(f.seed));
    if (f.workers >= 0) set("ensemble.workers", std::to_string(f.workers));
    if (f.m > 0) set("ensemble.m", std::to_string(f.m));
    if (f.particles > 0) set("ensemble.n_particles", std::to_string(f.particles));
    if (f.eb0 >= 0) set("ensemble.eb0", std::to_string(f.eb0));
    if (f.t_end > 0) set("ensemble.t_end", std::to_string(f.t_end));
    if (f.dt > 0) set("ensemble.sample_dt", std::to_string(f.dt));
    if (f.runs > 0) set("ensemble.runs", std::to_string(f.runs));
    if (f.emit_plots) set("output.emit_plots", "true");
    if (!f.out.empty()) set("output.dir", f.out);
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"springy billiards: event-driven tables, reduced bar models, "
                 "equilibration-rate analysis"};
    app.require_subcommand(1);

    CommonFlags sim_f, trace_f, inv_f;

    auto* sim = app.add_subcommand("simulate", "run an ensemble, write series CSVs");
    add_common(sim, sim_f);
    sim->add_option("--out", sim_f.out, "output directory")->required();

    auto* trc = app.add_subcommand("trace", "run one trajectory, write a trace CSV");
    add_common(trc, trace_f);
    std::string trace_out;
    trc->add_option("--out", trace_out, "output CSV path")->required();

    auto* rts = app.add_subcommand("rates", "fit equilibration rates of series files");
    std::vector<std::string> rate_inputs;
    std::string rates_out;
    double bar_period = 0.0;
    rts->add_option("inputs", rate_inputs, "series CSV files")->required();
    rts->add_option("--out", rates_out, "output rates CSV")->required();
    rts->add_option("--bar-period", bar_period,
                    "smoothing window for files without summary.json");

    auto* ext = app.add_subcommand("extrapolate", "extrapolate rates to m = 0");
    std::string ext_in, ext_json, ext_svg;
    ext->add_option("input", ext_in, "rates CSV")->required();
    ext->add_option("--out-json", ext_json, "output JSON path")->required();
    ext->add_option("--svg", ext_svg, "optional SVG plot path");

    auto* inv = app.add_subcommand("invariants", "invariant drift report for a trace");
    add_common(inv, inv_f);
    std::string inv_in, inv_json;
    inv->add_option("--in", inv_in, "trace CSV")->required();
    inv->add_option("--out-json", inv_json, "output JSON path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    char err[512] = {0};
    sb_status st = SB_OK;

    if (sim->parsed()) {
        sb_config* cfg = build_config(sim_f);
        st = sb_run_simulate(cfg, sim_f.out.c_str(), err, sizeof err);
        sb_config_free(cfg);
    } else if (trc->parsed()) {
        sb_config* cfg = build_config(trace_f);
        st = sb_run_trace(cfg, trace_out.c_str(), err, sizeof err);
        sb_config_free(cfg);
    } else if (rts->parsed()) {
        std::vector<const char*> ptrs;
        for (const auto& p : rate_inputs) ptrs.push_back(p.c_str());
        st = sb_fit_rates(ptrs.data(), ptrs.size(), rates_out.c_str(), bar_period,
                          err, sizeof err);
    } else if (ext->parsed()) {
        st = sb_extrapolate(ext_in.c_str(), ext_json.c_str(),
                            ext_svg.empty() ? nullptr : ext_svg.c_str(), err,
                            sizeof err);
    } else if (inv->parsed()) {
        sb_config* cfg = build_config(inv_f);
        st = sb_invariant_report(cfg, inv_in.c_str(), inv_json.c_str(), err,
                                 sizeof err);
        sb_config_free(cfg);
    }

    if (st != SB_OK) std::fprintf(stderr, "springy: %s\n", err);
    return status_to_exit(st);
}
