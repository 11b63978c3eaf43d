#include "springy/driver.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

#include <json.hpp>

namespace springy::driver {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json spec_echo(const cfg::RunConfig& c) {
    json j;
    j["geometry"] = c.geometry_kind;
    j["model"] = c.spec.model == ens::ModelKind::Billiard ? "billiard" : "reduced";
    j["n_particles"] = c.spec.n_particles;
    j["m"] = c.spec.m;
    j["eb0"] = c.spec.eb0;
    j["t_end"] = c.spec.t_end;
    j["sample_dt"] = c.spec.sample_dt;
    j["seed"] = c.spec.seed;
    j["runs"] = c.spec.runs;
    j["E"] = ens::total_energy(c.geometry);
    j["bar_period"] = ens::bar_period(c.geometry);
    return j;
}

void write_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw SimulationError("cannot open for writing: " + path);
    out << j.dump(2) << "\n";
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SimulationError("cannot open for reading: " + path);
    json j;
    in >> j;
    return j;
}

} // namespace

std::vector<std::string> cmd_simulate(const cfg::RunConfig& c,
                                      const std::string& out_dir) {
    cfg::validate(c);
    fs::create_directories(out_dir);
    const auto t_wall0 = std::chrono::steady_clock::now();

    std::vector<std::string> paths;
    for (int run = 0; run < c.spec.runs; ++run) {
        const ens::Series s = ens::run_ensemble(c.geometry, c.spec, run);
        const std::string path =
            (fs::path(out_dir) / ("series_run" + std::to_string(run) + ".csv")).string();
        io::write_series_csv(path, s);
        paths.push_back(path);
    }
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_wall0)
            .count();

    json summary = spec_echo(c);
    summary["wall_clock_s"] = wall;
    summary["failures"] = 0; // runs abort beyond the failure budget
    summary["series_files"] = json::array();
    for (const auto& p : paths)
        summary["series_files"].push_back(fs::path(p).filename().string());
    write_json((fs::path(out_dir) / "summary.json").string(), summary);

    if (c.output.emit_plots && !paths.empty()) {
        const ens::Series s0 = io::read_series_csv(paths.front());
        io::write_svg_lines((fs::path(out_dir) / "delta_ke.svg").string(),
                            "delta KE vs t", {s0.t}, {s0.delta_ke});
    }
    return paths;
}

void cmd_trace(const cfg::RunConfig& c, const std::string& out_csv) {
    cfg::validate(c);
    const auto trace = ens::run_trace(c.geometry, c.spec);
    const auto j = ens::invariant_series(c.geometry, trace);
    if (const fs::path dir = fs::path(out_csv).parent_path(); !dir.empty())
        fs::create_directories(dir);
    io::write_trace_csv(out_csv, trace, j);
}

void cmd_rates(const std::vector<std::string>& series_paths,
               const std::string& out_csv, double fallback_bar_period) {
    if (series_paths.empty())
        throw ConfigError("rates: no input series files given");

    struct Group {
        std::vector<ens::RateFit> fits;
    };
    std::map<std::pair<double, double>, Group> groups;

    for (const auto& p : series_paths) {
        const ens::Series s = io::read_series_csv(p);
        double m = 0.0, eb0 = 0.0, period = fallback_bar_period;
        const fs::path meta = fs::path(p).parent_path() / "summary.json";
        if (fs::exists(meta)) {
            const json j = read_json(meta.string());
            m = j.value("m", 0.0);
            eb0 = j.value("eb0", 0.0);
            period = j.value("bar_period", period);
        }
        if (!(period > 0.0) || std::isnan(period))
            throw ConfigError(p + ": no summary.json found and no bar period given");
        groups[{m, eb0}].fits.push_back(ens::fit_rate(s, period));
    }

    std::vector<io::RateRow> rows;
    for (const auto& [key, grp] : groups) {
        io::RateRow r;
        r.m = key.first;
        r.eb0 = key.second;
        r.runs = static_cast<int>(grp.fits.size());
        double sum = 0, sum2 = 0, sumT = 0;
        int n_ok = 0;
        for (const auto& f : grp.fits) {
            if (f.no_decay) {
                ++r.no_decay;
                continue;
            }
            sum += f.rate;
            sum2 += f.rate * f.rate;
            sumT += f.t_efold;
            ++n_ok;
        }
        if (n_ok > 0) {
            r.rate = sum / n_ok;
            r.t_efold = sumT / n_ok;
            if (n_ok > 1) {
                const double var =
                    std::max(0.0, (sum2 - n_ok * r.rate * r.rate) / (n_ok - 1));
                r.stddev = std::sqrt(var);
                r.sterr = r.stddev / std::sqrt(static_cast<double>(n_ok));
            }
        }
        rows.push_back(r);
    }
    if (const fs::path dir = fs::path(out_csv).parent_path(); !dir.empty())
        fs::create_directories(dir);
    io::write_rates_csv(out_csv, rows);
}

void cmd_extrapolate(const std::string& rates_csv, const std::string& out_json,
                     const std::string& out_svg) {
    const auto rows = io::read_rates_csv(rates_csv);
    std::map<double, std::vector<io::RateRow>> by_eb0;
    for (const auto& r : rows)
        if (!r.no_decay || r.runs > r.no_decay) by_eb0[r.eb0].push_back(r);
    if (by_eb0.empty()) throw ConfigError(rates_csv + ": no usable rate rows");

    json out;
    out["fits"] = json::array();
    std::vector<std::vector<double>> plot_x, plot_y;
    for (const auto& [eb0, grp] : by_eb0) {
        std::vector<double> m, rate, sd;
        for (const auto& r : grp) {
            m.push_back(r.m);
            rate.push_back(r.rate);
            sd.push_back(r.stddev);
        }
        const ens::Extrapolation ex = ens::sqrt_m_extrapolation(m, rate, sd);
        json f;
        f["eb0"] = eb0;
        f["intercept"] = ex.intercept;
        f["slope"] = ex.slope;
        f["intercept_std"] = ex.intercept_std;
        f["n_points"] = m.size();
        out["fits"].push_back(f);

        std::vector<double> xs, ys;
        for (std::size_t i = 0; i < m.size(); ++i) {
            xs.push_back(std::sqrt(m[i]));
            ys.push_back(rate[i]);
        }
        plot_x.push_back(xs);
        plot_y.push_back(ys);
        plot_x.push_back({0.0, xs.empty() ? 1.0 : xs.back()});
        plot_y.push_back({ex.intercept,
                          ex.intercept + ex.slope * (xs.empty() ? 1.0 : xs.back())});
    }
    if (out["fits"].size() == 1) {
        out["intercept"] = out["fits"][0]["intercept"];
        out["slope"] = out["fits"][0]["slope"];
        out["intercept_std"] = out["fits"][0]["intercept_std"];
    }
    if (const fs::path dir = fs::path(out_json).parent_path(); !dir.empty())
        fs::create_directories(dir);
    write_json(out_json, out);
    if (!out_svg.empty())
        io::write_svg_lines(out_svg, "rate vs sqrt(m)", plot_x, plot_y);
}

void cmd_invariants(const cfg::RunConfig& c, const std::string& trace_csv,
                    const std::string& out_json) {
    cfg::validate(c);
    const io::TraceFile tf = io::read_trace_csv(trace_csv);
    const auto j = ens::invariant_series(c.geometry, tf.samples);
    const auto segs = ens::invariant_segments(c.geometry, tf.samples, j);
    json out;
    out["n_samples"] = tf.samples.size();
    out["segments"] = json::array();
    double max_drift = 0.0;
    for (const auto& sg : segs) {
        json s;
        s["begin"] = sg.begin;
        s["end"] = sg.end;
        s["t0"] = tf.samples[sg.begin].t;
        s["t1"] = tf.samples[sg.end - 1].t;
        s["tag"] = geom::region_name(sg.tag);
        s["j_mean"] = sg.j_mean;
        s["drift_rel"] = sg.drift_rel;
        out["segments"].push_back(s);
        if (sg.end - sg.begin >= 8) max_drift = std::max(max_drift, sg.drift_rel);
    }
    out["max_drift_rel_long_segments"] = max_drift;
    if (const fs::path dir = fs::path(out_json).parent_path(); !dir.empty())
        fs::create_directories(dir);
    write_json(out_json, out);
}

} // namespace springy::driver
