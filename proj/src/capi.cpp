#include "springy/billiards.h"

#include <cstring>
#include <string>

#include "springy/driver.hpp"
#include "springy/dynamics.hpp"
#include "springy/reduced.hpp"

using springy::ConfigError;
using springy::SimulationError;

struct sb_config {
    springy::cfg::RunConfig c;
};

namespace {

void put_err(char* err, size_t err_len, const std::string& msg) {
    if (!err || err_len == 0) return;
    const size_t n = std::min(err_len - 1, msg.size());
    std::memcpy(err, msg.data(), n);
    err[n] = '\0';
}

template <typename Fn>
sb_status guarded(char* err, size_t err_len, Fn&& fn) {
    try {
        fn();
        return SB_OK;
    } catch (const ConfigError& e) {
        put_err(err, err_len, e.what());
        return SB_ERROR_CONFIG;
    } catch (const std::exception& e) {
        put_err(err, err_len, e.what());
        return SB_ERROR_RUNTIME;
    }
}

} // namespace

extern "C" {

const char* sb_version(void) { return "springybilliards 1.0.0"; }

sb_config* sb_config_create(const char* geometry_kind) {
    if (!geometry_kind) return nullptr;
    try {
        auto* h = new sb_config{springy::cfg::default_config(geometry_kind)};
        return h;
    } catch (const std::exception&) {
        return nullptr;
    }
}

sb_config* sb_config_load(const char* path, char* err, size_t err_len) {
    if (!path) {
        put_err(err, err_len, "null path");
        return nullptr;
    }
    try {
        return new sb_config{springy::cfg::load_config(path)};
    } catch (const std::exception& e) {
        put_err(err, err_len, e.what());
        return nullptr;
    }
}

sb_status sb_config_set(sb_config* cfg, const char* key, const char* value,
                        char* err, size_t err_len) {
    if (!cfg || !key || !value) {
        put_err(err, err_len, "null argument");
        return SB_ERROR_CONFIG;
    }
    return guarded(err, err_len,
                   [&] { springy::cfg::apply_override(cfg->c, key, value); });
}

sb_status sb_config_validate(const sb_config* cfg, char* err, size_t err_len) {
    if (!cfg) {
        put_err(err, err_len, "null config");
        return SB_ERROR_CONFIG;
    }
    return guarded(err, err_len, [&] { springy::cfg::validate(cfg->c); });
}

size_t sb_config_dump(const sb_config* cfg, char* buf, size_t buf_len) {
    if (!cfg) return 0;
    const std::string s = springy::cfg::dump(cfg->c);
    if (buf && buf_len > 0) {
        const size_t n = std::min(buf_len - 1, s.size());
        std::memcpy(buf, s.data(), n);
        buf[n] = '\0';
    }
    return s.size();
}

void sb_config_free(sb_config* cfg) { delete cfg; }

sb_status sb_run_simulate(const sb_config* cfg, const char* out_dir, char* err,
                          size_t err_len) {
    if (!cfg || !out_dir) {
        put_err(err, err_len, "null argument");
        return SB_ERROR_CONFIG;
    }
    return guarded(err, err_len,
                   [&] { springy::driver::cmd_simulate(cfg->c, out_dir); });
}

sb_status sb_run_trace(const sb_config* cfg, const char* out_csv, char* err,
                       size_t err_len) {
    if (!cfg || !out_csv) {
        put_err(err, err_len, "null argument");
        return SB_ERROR_CONFIG;
    }
    return guarded(err, err_len, [&] { springy::driver::cmd_trace(cfg->c, out_csv); });
}

sb_status sb_fit_rates(const char* const* series_csvs, size_t n_files,
                       const char* out_csv, double fallback_bar_period, char* err,
                       size_t err_len) {
    if (!series_csvs || !out_csv) {
        put_err(err, err_len, "null argument");
        return SB_ERROR_CONFIG;
    }
    return guarded(err, err_len, [&] {
        std::vector<std::string> paths(series_csvs, series_csvs + n_files);
        springy::driver::cmd_rates(paths, out_csv, fallback_bar_period);
    });
}

sb_status sb_extrapolate(const char* rates_csv, const char* out_json,
                         const char* out_svg, char* err, size_t err_len) {
    if (!rates_csv || !out_json) {
        put_err(err, err_len, "null argument");
        return SB_ERROR_CONFIG;
    }
    return guarded(err, err_len, [&] {
        springy::driver::cmd_extrapolate(rates_csv, out_json,
                                         out_svg ? out_svg : "");
    });
}

sb_status sb_invariant_report(const sb_config* cfg, const char* trace_csv,
                              const char* out_json, char* err, size_t err_len) {
    if (!cfg || !trace_csv || !out_json) {
        put_err(err, err_len, "null argument");
        return SB_ERROR_CONFIG;
    }
    return guarded(err, err_len, [&] {
        springy::driver::cmd_invariants(cfg->c, trace_csv, out_json);
    });
}

sb_status sb_collision(double v_p, double v_b, double mass_ratio, double* v_p_out,
                       double* v_b_out) {
    if (!v_p_out || !v_b_out || !(mass_ratio >= 0.0)) return SB_ERROR_CONFIG;
    const auto [vp, vb] = springy::dyn::elastic_bar_collision(v_p, v_b, mass_ratio);
    *v_p_out = vp;
    *v_b_out = vb;
    return SB_OK;
}

sb_status sb_pressure_equilibrium(const sb_config* cfg, double* y_f_out, char* err,
                                  size_t err_len) {
    if (!cfg || !y_f_out) {
        put_err(err, err_len, "null argument");
        return SB_ERROR_CONFIG;
    }
    return guarded(err, err_len, [&] {
        const auto* mg =
            std::get_if<springy::geom::MushroomGeometry>(&cfg->c.geometry);
        if (!mg)
            throw ConfigError(
                "pressure equilibrium is defined for stadium/mushroom tables");
        *y_f_out = springy::reduced::pressure_equilibrium(*mg, mg->E);
    });
}

} // extern "C"
