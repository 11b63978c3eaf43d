#include "springy/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace springy::io {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw SimulationError("cannot open for writing: " + path);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SimulationError("cannot open for reading: " + path);
    return in;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double to_double(const std::string& s, const std::string& path) {
    try {
        return std::stod(s);
    } catch (const std::exception&) {
        throw SimulationError(path + ": malformed number '" + s + "'");
    }
}

geom::Region region_from_name(const std::string& name, const std::string& path) {
    using geom::Region;
    if (name == "free") return Region::FreeSpan;
    if (name == "up") return Region::ChamberUp;
    if (name == "down") return Region::ChamberDown;
    if (name == "cap") return Region::Cap;
    if (name == "stem") return Region::Stem;
    if (name == "captured") return Region::Captured;
    if (name == "chaotic") return Region::Chaotic;
    throw SimulationError(path + ": unknown region tag '" + name + "'");
}

} // namespace

void write_series_csv(const std::string& path, const ens::Series& s) {
    auto out = open_out(path);
    out << "t,delta_ke,mean_Eb,mean_Ep,se_delta_ke\n";
    for (std::size_t i = 0; i < s.t.size(); ++i) {
        out << format_double(s.t[i]) << ',' << format_double(s.delta_ke[i]) << ','
            << format_double(s.mean_eb[i]) << ',' << format_double(s.mean_ep[i])
            << ',' << format_double(s.se[i]) << '\n';
    }
}

ens::Series read_series_csv(const std::string& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line))
        throw SimulationError(path + ": empty series file");
    if (split_csv(line).size() < 4)
        throw SimulationError(path + ": unexpected series header: " + line);
    ens::Series s;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv(line);
        if (f.size() < 4) throw SimulationError(path + ": short series row");
        s.t.push_back(to_double(f[0], path));
        s.delta_ke.push_back(to_double(f[1], path));
        s.mean_eb.push_back(to_double(f[2], path));
        s.mean_ep.push_back(to_double(f[3], path));
        s.se.push_back(f.size() > 4 ? to_double(f[4], path) : 0.0);
    }
    return s;
}

void write_trace_csv(const std::string& path, const std::vector<TraceSample>& samples,
                     const std::vector<double>& j) {
    auto out = open_out(path);
    out << "t,y_b,v_b,E_b,E_p,J,region\n";
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& ts = samples[i];
        out << format_double(ts.t) << ',' << format_double(ts.y_b) << ','
            << format_double(ts.v_b) << ',' << format_double(ts.e_b) << ','
            << format_double(ts.e_p) << ','
            << format_double(i < j.size() ? j[i] : 0.0) << ','
            << geom::region_name(ts.region) << '\n';
    }
}

TraceFile read_trace_csv(const std::string& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw SimulationError(path + ": empty trace file");
    if (split_csv(line).size() != 7)
        throw SimulationError(path + ": unexpected trace header: " + line);
    TraceFile tf;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != 7) throw SimulationError(path + ": short trace row");
        TraceSample ts;
        ts.t = to_double(f[0], path);
        ts.y_b = to_double(f[1], path);
        ts.v_b = to_double(f[2], path);
        ts.e_b = to_double(f[3], path);
        ts.e_p = to_double(f[4], path);
        ts.region = region_from_name(f[6], path);
        tf.samples.push_back(ts);
        tf.j.push_back(to_double(f[5], path));
    }
    return tf;
}

void write_rates_csv(const std::string& path, const std::vector<RateRow>& rows) {
    auto out = open_out(path);
    out << "m,eb0,rate,std,T,se,runs,no_decay\n";
    for (const auto& r : rows) {
        out << format_double(r.m) << ',' << format_double(r.eb0) << ','
            << format_double(r.rate) << ',' << format_double(r.stddev) << ','
            << format_double(r.t_efold) << ',' << format_double(r.sterr) << ','
            << r.runs << ',' << r.no_decay << '\n';
    }
}

std::vector<RateRow> read_rates_csv(const std::string& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw SimulationError(path + ": empty rates file");
    if (split_csv(line).size() != 8)
        throw SimulationError(path + ": unexpected rates header: " + line);
    std::vector<RateRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != 8) throw SimulationError(path + ": short rates row");
        RateRow r;
        r.m = to_double(f[0], path);
        r.eb0 = to_double(f[1], path);
        r.rate = to_double(f[2], path);
        r.stddev = to_double(f[3], path);
        r.t_efold = to_double(f[4], path);
        r.sterr = to_double(f[5], path);
        r.runs = static_cast<int>(to_double(f[6], path));
        r.no_decay = static_cast<int>(to_double(f[7], path));
        rows.push_back(r);
    }
    return rows;
}

void write_svg_lines(const std::string& path, const std::string& title,
                     const std::vector<std::vector<double>>& xs,
                     const std::vector<std::vector<double>>& ys) {
    const int W = 720, H = 480, pad = 50;
    double xmin = HUGE_VAL, xmax = -HUGE_VAL, ymin = HUGE_VAL, ymax = -HUGE_VAL;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        for (double x : xs[k]) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
        }
        for (double y : ys[k]) {
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    }
    if (!(xmax > xmin)) xmax = xmin + 1.0;
    if (!(ymax > ymin)) ymax = ymin + 1.0;
    auto px = [&](double x) { return pad + (x - xmin) / (xmax - xmin) * (W - 2 * pad); };
    auto py = [&](double y) { return H - pad - (y - ymin) / (ymax - ymin) * (H - 2 * pad); };

    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                   "#9467bd", "#8c564b"};
    auto out = open_out(path);
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H
        << "'>\n";
    out << "<rect width='100%' height='100%' fill='white'/>\n";
    out << "<text x='" << W / 2 << "' y='24' text-anchor='middle' font-size='15'>"
        << title << "</text>\n";
    out << "<line x1='" << pad << "' y1='" << H - pad << "' x2='" << W - pad
        << "' y2='" << H - pad << "' stroke='black'/>\n";
    out << "<line x1='" << pad << "' y1='" << pad << "' x2='" << pad << "' y2='"
        << H - pad << "' stroke='black'/>\n";
    out << "<text x='" << pad << "' y='" << H - pad + 20 << "' font-size='11'>"
        << format_double(xmin) << "</text>\n";
    out << "<text x='" << W - pad << "' y='" << H - pad + 20
        << "' text-anchor='end' font-size='11'>" << format_double(xmax) << "</text>\n";
    out << "<text x='" << pad - 4 << "' y='" << H - pad
        << "' text-anchor='end' font-size='11'>" << format_double(ymin) << "</text>\n";
    out << "<text x='" << pad - 4 << "' y='" << pad
        << "' text-anchor='end' font-size='11'>" << format_double(ymax) << "</text>\n";
    for (std::size_t k = 0; k < xs.size(); ++k) {
        out << "<polyline fill='none' stroke='" << colors[k % 6]
            << "' stroke-width='1' points='";
        for (std::size_t i = 0; i < xs[k].size(); ++i)
            out << px(xs[k][i]) << ',' << py(ys[k][i]) << ' ';
        out << "'/>\n";
    }
    out << "</svg>\n";
}

} // namespace springy::io
