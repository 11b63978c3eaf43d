#ifndef SPRINGY_IO_HPP
#define SPRINGY_IO_HPP

#include <string>
#include <vector>

#include "springy/ensemble.hpp"
#include "springy/trace.hpp"

namespace springy::io {

// All numbers are serialized with 17 significant digits so files round-trip
// to the exact double.
std::string format_double(double v);

void write_series_csv(const std::string& path, const ens::Series& s);
ens::Series read_series_csv(const std::string& path);

struct TraceFile {
    std::vector<TraceSample> samples;
    std::vector<double> j;
};
void write_trace_csv(const std::string& path, const std::vector<TraceSample>& samples,
                     const std::vector<double>& j);
TraceFile read_trace_csv(const std::string& path);

struct RateRow {
    double m = 0.0;
    double eb0 = 0.0;
    double rate = 0.0;
    double stddev = 0.0;
    double t_efold = 0.0;
    double sterr = 0.0;
    int runs = 0;
    int no_decay = 0;
};
void write_rates_csv(const std::string& path, const std::vector<RateRow>& rows);
std::vector<RateRow> read_rates_csv(const std::string& path);

// Minimal SVG: one polyline per series over labeled axes.
void write_svg_lines(const std::string& path, const std::string& title,
                     const std::vector<std::vector<double>>& xs,
                     const std::vector<std::vector<double>>& ys);

} // namespace springy::io

#endif
