#ifndef SPRINGY_DRIVER_HPP
#define SPRINGY_DRIVER_HPP

#include <string>
#include <vector>

#include "springy/config.hpp"
#include "springy/io.hpp"

namespace springy::driver {

// Runs the configured ensemble `runs` times; writes series_run<k>.csv per run
// plus summary.json into out_dir. Returns the written series paths.
std::vector<std::string> cmd_simulate(const cfg::RunConfig& c,
                                      const std::string& out_dir);

// One trajectory / realization with the invariant column populated.
void cmd_trace(const cfg::RunConfig& c, const std::string& out_csv);

// Fits every input series and aggregates by (m, eb0); run metadata is taken
// from the summary.json next to each series file (fallback_bar_period is used
// for bare files, NaN = require metadata).
void cmd_rates(const std::vector<std::string>& series_paths,
               const std::string& out_csv, double fallback_bar_period);

// Weighted linear fit of rate against sqrt(m) per initial-ensemble group.
void cmd_extrapolate(const std::string& rates_csv, const std::string& out_json,
                     const std::string& out_svg /* empty = none */);

// Recomputes the invariant from a trace and reports per-segment drift.
void cmd_invariants(const cfg::RunConfig& c, const std::string& trace_csv,
                    const std::string& out_json);

} // namespace springy::driver

#endif
