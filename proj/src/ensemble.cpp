#include "springy/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

namespace springy::ens {

double total_energy(const Geometry& g) {
    return std::visit([](const auto& gg) { return gg.E; }, g);
}
double bar_spring_constant(const Geometry& g) {
    return std::visit([](const auto& gg) { return gg.k; }, g);
}
double bar_period(const Geometry& g) {
    return std::visit([](const auto& gg) { return gg.bar_period(); }, g);
}
bool is_rob(const Geometry& g) {
    return std::holds_alternative<geom::RobGeometry>(g);
}

namespace {
[[noreturn]] void fail(const std::string& field, const std::string& msg) {
    throw ConfigError(field + ": " + msg);
}
double bar_mass(const Geometry& g) {
    return std::visit([](const auto& gg) { return gg.M; }, g);
}
} // namespace

void EnsembleSpec::validate(const Geometry& g) const {
    std::visit([](const auto& gg) { gg.validate(); }, g);
    if (n_particles < 1) fail("ensemble.n_particles", "must be >= 1");
    if (!(eb0 >= 0.0 && eb0 <= 1.0))
        fail("ensemble.eb0", "must lie in [0,1] (fraction of the total energy)");
    if (!(sample_dt > 0.0)) fail("ensemble.sample_dt", "must be > 0");
    if (!(t_end > 0.0)) fail("ensemble.t_end", "must be > 0");
    if (runs < 1) fail("ensemble.runs", "must be >= 1");
    if (model == ModelKind::Billiard && !(m > 0.0))
        fail("ensemble.m", "must be > 0 for billiard runs");
    if (failure_budget < 0) fail("ensemble.failure_budget", "must be >= 0");
}

long sample_count(double t_end, double sample_dt) {
    long n = 0;
    while (static_cast<double>(n) * sample_dt <= t_end) ++n;
    return n;
}

// ---------------------------------------------------------------------------
// Initial ensembles
// ---------------------------------------------------------------------------

namespace {

// Bar at energy e_b with uniform oscillation phase.
dyn::BarState draw_bar(double e_b, double k, double M, Rng& rng) {
    dyn::BarState b;
    b.k = k;
    b.M = M;
    const double phi = rng.uniform(0.0, 2.0 * kPi);
    const double amp = std::sqrt(2.0 * e_b / k);
    b.y_b = amp * std::sin(phi);
    b.v_b = amp * b.omega() * std::cos(phi);
    return b;
}

} // namespace

dyn::SystemState initial_billiard_state(const Geometry& g, const EnsembleSpec& spec,
                                        Rng& rng) {
    const double E = total_energy(g);
    const double e_b0 = spec.eb0 * E;
    const double e_p0 = E - e_b0;
    dyn::SystemState s;

    if (const auto* rg = std::get_if<geom::RobGeometry>(&g)) {
        s.bar = draw_bar(e_b0, rg->k, rg->M, rng);
        auto& p = s.particle;
        p.m = spec.m;
        do {
            p.x = rng.uniform(0.0, rg->L);
            p.y = rng.uniform(-0.5 * rg->h, 0.5 * rg->h);
        } while (p.x <= rg->lambda && p.y == s.bar.y_b);
        p.u = rg->u_p * rng.sign();
        p.v = std::sqrt(2.0 * e_p0 / spec.m) * rng.sign();
        s.region = geom::classify_region(*rg, p.x, p.y, s.bar.y_b, p.v);
        return s;
    }

    const auto& mg = std::get<geom::MushroomGeometry>(g);
    s.bar = draw_bar(e_b0, mg.k, mg.M, rng);
    auto& p = s.particle;
    p.m = spec.m;
    const double speed = std::sqrt(2.0 * e_p0 / spec.m);
    const double face = mg.bar_face(s.bar.y_b);
    const double w = geom::w_of_yb(mg, s.bar.y_b);
    for (;;) {
        const double x = rng.uniform(-mg.h, mg.h);
        const double y = rng.uniform(face, mg.h);
        if (!geom::mushroom_contains(mg, s.bar.y_b, x, y, 0.0)) continue;
        if (y == 0.0) continue;
        const double alpha = rng.uniform(0.0, 2.0 * kPi);
        const double u = speed * std::cos(alpha), v = speed * std::sin(alpha);
        if (y > 0.0 && speed > 0.0) {
            // reject the integrable cap component
            const double rho = std::abs(x * v - y * u) / speed;
            if (rho >= w) continue;
        }
        if (y > 0.0 && speed == 0.0) continue; // a resting cap particle never mixes
        p.x = x;
        p.y = y;
        p.u = u;
        p.v = v;
        break;
    }
    s.region = geom::classify_region(mg, p.x, p.y, s.bar.y_b, p.v);
    return s;
}

reduced::ReducedState initial_reduced_state(const Geometry& g,
                                            const EnsembleSpec& spec, Rng& rng) {
    const double E = total_energy(g);
    const double e_b0 = spec.eb0 * E;
    reduced::ReducedState s;
    const double k = bar_spring_constant(g);
    const double M = bar_mass(g);
    const dyn::BarState b = draw_bar(e_b0, k, M, rng);
    s.y_b = b.y_b;
    s.v_b = b.v_b;
    s.t = 0.0;
    if (is_rob(g)) {
        s.branch = geom::Region::FreeSpan; // the first period draw sets the side
        s.J = e_b0;
    } else {
        s.branch = geom::Region::Chaotic;
        const auto& mg = std::get<geom::MushroomGeometry>(g);
        s.J = (E - e_b0) * reduced::g_factor(mg, s.y_b);
    }
    return s;
}

// ---------------------------------------------------------------------------
// Ensemble runner
// ---------------------------------------------------------------------------

namespace {

constexpr int kBlockSize = 32;

struct BlockSums {
    std::vector<double> ke_bar, ke_part, e_b, e_p, d2;
    long n_members = 0;

    void init(std::size_t n) {
        ke_bar.assign(n, 0.0);
        ke_part.assign(n, 0.0);
        e_b.assign(n, 0.0);
        e_p.assign(n, 0.0);
        d2.assign(n, 0.0);
    }
};

// Per-degree-of-freedom particle kinetic term entering delta KE.
inline double particle_ke_term(bool rob, const TraceSample& ts) {
    return rob ? ts.e_p : 0.5 * ts.e_p;
}

struct MemberFailure {
    int member;
    std::string what;
};

} // namespace

Series run_ensemble(const Geometry& g, const EnsembleSpec& spec, int run_index) {
    spec.validate(g);
    const long n_samples = sample_count(spec.t_end, spec.sample_dt);
    const int n = spec.n_particles;
    const int n_blocks = (n + kBlockSize - 1) / kBlockSize;
    const bool rob = is_rob(g);
    const double M = bar_mass(g);

    std::vector<BlockSums> blocks(n_blocks);
    std::atomic<int> next_block{0};
    std::mutex fail_mutex;
    std::vector<MemberFailure> failures;

    int workers = spec.workers > 0
                      ? spec.workers
                      : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::max(1, std::min(workers, n_blocks));

    // Members are staged into scratch rows and merged only on success, so a
    // failing member never pollutes the block sums.
    auto staged_worker = [&]() {
        std::optional<dyn::RobSimulator> rob_sim;
        std::optional<dyn::MushroomSimulator> mush_sim;
        std::optional<reduced::RobReducedModel> rob_model;
        std::optional<reduced::MushroomReducedModel> mush_model;
        if (spec.model == ModelKind::Billiard) {
            if (rob)
                rob_sim.emplace(std::get<geom::RobGeometry>(g));
            else
                mush_sim.emplace(std::get<geom::MushroomGeometry>(g));
        } else {
            if (rob)
                rob_model.emplace(std::get<geom::RobGeometry>(g));
            else
                mush_model.emplace(std::get<geom::MushroomGeometry>(g));
        }
        std::vector<double> row_kb(n_samples), row_kp(n_samples), row_eb(n_samples),
            row_ep(n_samples);

        for (;;) {
            const int b = next_block.fetch_add(1);
            if (b >= n_blocks) break;
            auto& sums = blocks[b];
            sums.init(n_samples);
            const int lo = b * kBlockSize;
            const int hi = std::min(n, lo + kBlockSize);
            for (int member = lo; member < hi; ++member) {
                Rng rng(spec.seed, static_cast<std::uint64_t>(run_index),
                        static_cast<std::uint64_t>(member));
                long idx = 0;
                Recorder rec = [&](const TraceSample& ts) {
                    if (idx >= n_samples) {
                        ++idx; // flag overflow via count
                        return;
                    }
                    row_kb[idx] = 0.5 * M * ts.v_b * ts.v_b;
                    row_kp[idx] = particle_ke_term(rob, ts);
                    row_eb[idx] = ts.e_b;
                    row_ep[idx] = ts.e_p;
                    ++idx;
                };
                try {
                    if (spec.model == ModelKind::Billiard) {
                        dyn::SystemState st = initial_billiard_state(g, spec, rng);
                        if (rob)
                            rob_sim->run(st, spec.t_end, spec.sample_dt, rec);
                        else
                            mush_sim->run(st, spec.t_end, spec.sample_dt, rec);
                    } else {
                        reduced::ReducedState st = initial_reduced_state(g, spec, rng);
                        if (rob)
                            rob_model->run(st, rng, spec.t_end, spec.sample_dt, rec);
                        else
                            mush_model->run(st, rng, spec.t_end, spec.sample_dt, rec);
                    }
                    if (idx != n_samples)
                        throw SimulationError("sample grid mismatch: emitted " +
                                              std::to_string(idx) + " of " +
                                              std::to_string(n_samples));
                    for (long i = 0; i < n_samples; ++i) {
                        sums.ke_bar[i] += row_kb[i];
                        sums.ke_part[i] += row_kp[i];
                        sums.e_b[i] += row_eb[i];
                        sums.e_p[i] += row_ep[i];
                        const double d = row_kb[i] - row_kp[i];
                        sums.d2[i] += d * d;
                    }
                    ++sums.n_members;
                } catch (const std::exception& e) {
                    std::lock_guard<std::mutex> lk(fail_mutex);
                    failures.push_back({member, e.what()});
                }
            }
        }
    };

    if (workers == 1) {
        staged_worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int i = 0; i < workers; ++i) pool.emplace_back(staged_worker);
        for (auto& th : pool) th.join();
    }

    if (static_cast<int>(failures.size()) > spec.failure_budget) {
        std::ostringstream os;
        os << failures.size() << " member(s) failed (budget " << spec.failure_budget
           << "); first: member " << failures.front().member << ": "
           << failures.front().what;
        throw SimulationError(os.str());
    }

    Series out;
    out.t.resize(n_samples);
    out.delta_ke.resize(n_samples);
    out.mean_eb.resize(n_samples);
    out.mean_ep.resize(n_samples);
    out.se.resize(n_samples);

    std::vector<double> kb(n_samples, 0.0), kp(n_samples, 0.0), eb(n_samples, 0.0),
        ep(n_samples, 0.0), d2(n_samples, 0.0);
    long n_ok = 0;
    for (const auto& blk : blocks) { // fixed order: deterministic reduction
        if (blk.ke_bar.empty()) continue;
        n_ok += blk.n_members;
        for (long i = 0; i < n_samples; ++i) {
            kb[i] += blk.ke_bar[i];
            kp[i] += blk.ke_part[i];
            eb[i] += blk.e_b[i];
            ep[i] += blk.e_p[i];
            d2[i] += blk.d2[i];
        }
    }
    if (n_ok == 0) throw SimulationError("all ensemble members failed");
    out.n_members = static_cast<int>(n_ok);
    const double inv = 1.0 / static_cast<double>(n_ok);
    for (long i = 0; i < n_samples; ++i) {
        out.t[i] = static_cast<double>(i) * spec.sample_dt;
        out.delta_ke[i] = (kb[i] - kp[i]) * inv;
        out.mean_eb[i] = eb[i] * inv;
        out.mean_ep[i] = ep[i] * inv;
        double var = 0.0;
        if (n_ok > 1) {
            const double mean_d = (kb[i] - kp[i]) * inv;
            var = std::max(0.0, (d2[i] - n_ok * mean_d * mean_d) /
                                    static_cast<double>(n_ok - 1));
        }
        out.se[i] = std::sqrt(var * inv);
    }
    return out;
}

std::vector<TraceSample> run_trace(const Geometry& g, const EnsembleSpec& spec,
                                   int member, int run_index) {
    spec.validate(g);
    std::vector<TraceSample> trace;
    trace.reserve(static_cast<std::size_t>(sample_count(spec.t_end, spec.sample_dt)));
    Recorder rec = [&](const TraceSample& ts) { trace.push_back(ts); };
    Rng rng(spec.seed, static_cast<std::uint64_t>(run_index),
            static_cast<std::uint64_t>(member));
    if (spec.model == ModelKind::Billiard) {
        dyn::SystemState st = initial_billiard_state(g, spec, rng);
        if (is_rob(g)) {
            dyn::RobSimulator sim(std::get<geom::RobGeometry>(g));
            sim.run(st, spec.t_end, spec.sample_dt, rec);
        } else {
            dyn::MushroomSimulator sim(std::get<geom::MushroomGeometry>(g));
            sim.run(st, spec.t_end, spec.sample_dt, rec);
        }
    } else {
        reduced::ReducedState st = initial_reduced_state(g, spec, rng);
        if (is_rob(g)) {
            reduced::RobReducedModel model(std::get<geom::RobGeometry>(g));
            model.run(st, rng, spec.t_end, spec.sample_dt, rec);
        } else {
            reduced::MushroomReducedModel model(std::get<geom::MushroomGeometry>(g));
            model.run(st, rng, spec.t_end, spec.sample_dt, rec);
        }
    }
    return trace;
}

// ---------------------------------------------------------------------------
// Analysis
// ---------------------------------------------------------------------------

namespace {

std::vector<double> moving_average_abs(const std::vector<double>& x, int window) {
    const long n = static_cast<long>(x.size());
    std::vector<double> out(n, 0.0);
    const int hw = std::max(0, window / 2);
    for (long i = 0; i < n; ++i) {
        const long a = std::max<long>(0, i - hw);
        const long b = std::min(n - 1, i + hw);
        double acc = 0.0;
        for (long j = a; j <= b; ++j) acc += x[j];
        out[i] = std::abs(acc / static_cast<double>(b - a + 1));
    }
    return out;
}

} // namespace

RateFit fit_rate(const Series& s, double bar_period) {
    RateFit fit;
    const long n = static_cast<long>(s.t.size());
    if (n < 3) {
        fit.no_decay = true;
        return fit;
    }
    const double dt = s.t[1] - s.t[0];
    int window = static_cast<int>(std::lround(bar_period / dt));
    if (window % 2 == 0) ++window;
    window = std::max(1, window);
    fit.smooth_abs = moving_average_abs(s.delta_ke, window);
    const double s0 = fit.smooth_abs.front();
    if (!(s0 > 0.0)) {
        fit.no_decay = true;
        return fit;
    }
    const double target = s0 / std::exp(1.0);
    long i_fold = -1;
    for (long i = 1; i < n; ++i) {
        if (fit.smooth_abs[i] <= target) {
            i_fold = i;
            break;
        }
    }
    if (i_fold < 0) {
        fit.no_decay = true;
        return fit;
    }
    fit.t_efold = s.t[i_fold];

    // least squares of -log|smoothed| over [0, T], skipping sub-noise points
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    long cnt = 0;
    double ssr = 0.0;
    std::vector<std::pair<double, double>> pts;
    pts.reserve(i_fold + 1);
    for (long i = 0; i <= i_fold; ++i) {
        const double v = fit.smooth_abs[i];
        if (!(v > 0.0)) continue;
        if (!s.se.empty() && v < 2.0 * s.se[i]) continue;
        const double x = s.t[i], y = -std::log(v);
        pts.emplace_back(x, y);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++cnt;
    }
    if (cnt < 2) {
        fit.no_decay = true;
        return fit;
    }
    const double denom = cnt * sxx - sx * sx;
    if (denom == 0.0) {
        fit.no_decay = true;
        return fit;
    }
    fit.rate = (cnt * sxy - sx * sy) / denom;
    const double icept = (sy - fit.rate * sx) / cnt;
    for (auto [x, y] : pts) {
        const double r = y - (icept + fit.rate * x);
        ssr += r * r;
    }
    fit.residual = std::sqrt(ssr / cnt);
    return fit;
}

Extrapolation sqrt_m_extrapolation(const std::vector<double>& m,
                                   const std::vector<double>& rate,
                                   const std::vector<double>& rate_std) {
    const std::size_t n = m.size();
    if (n < 2 || rate.size() != n)
        throw ConfigError("extrapolation: need at least two mass values");
    bool weighted = rate_std.size() == n;
    if (weighted)
        for (double sdev : rate_std)
            if (!(sdev > 0.0)) weighted = false;

    double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = std::sqrt(m[i]);
        const double w = weighted ? 1.0 / (rate_std[i] * rate_std[i]) : 1.0;
        sw += w;
        swx += w * x;
        swy += w * rate[i];
        swxx += w * x * x;
        swxy += w * x * rate[i];
    }
    const double det = sw * swxx - swx * swx;
    if (det == 0.0) throw ConfigError("extrapolation: singular fit (repeated mass)");
    Extrapolation ex;
    ex.intercept = (swxx * swy - swx * swxy) / det;
    ex.slope = (sw * swxy - swx * swy) / det;
    if (weighted) {
        ex.intercept_std = std::sqrt(swxx / det);
    } else {
        double ssr = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = rate[i] - (ex.intercept + ex.slope * std::sqrt(m[i]));
            ssr += r * r;
        }
        const double s2 = n > 2 ? ssr / static_cast<double>(n - 2) : 0.0;
        ex.intercept_std = std::sqrt(s2 * swxx / det);
    }
    return ex;
}

namespace {

geom::Region invariant_branch(bool rob, geom::Region r) {
    if (rob) return r;
    return r == geom::Region::Captured ? geom::Region::Captured
                                       : geom::Region::Chaotic;
}

} // namespace

std::vector<double> invariant_series(const Geometry& g,
                                     const std::vector<TraceSample>& trace) {
    std::vector<double> j;
    j.reserve(trace.size());
    if (const auto* rg = std::get_if<geom::RobGeometry>(&g)) {
        for (const auto& ts : trace) {
            switch (ts.region) {
                case geom::Region::ChamberUp:
                    j.push_back(std::sqrt(std::max(0.0, ts.e_p)) *
                                geom::rob_chamber_length(*rg, ts.y_b, geom::Side::Up));
                    break;
                case geom::Region::ChamberDown:
                    j.push_back(std::sqrt(std::max(0.0, ts.e_p)) *
                                geom::rob_chamber_length(*rg, ts.y_b, geom::Side::Down));
                    break;
                default:
                    j.push_back(ts.e_b);
                    break;
            }
        }
        return j;
    }
    const auto& mg = std::get<geom::MushroomGeometry>(g);
    reduced::GTable table(mg);
    for (const auto& ts : trace) {
        if (ts.region == geom::Region::Captured)
            j.push_back(ts.e_b);
        else
            j.push_back(std::max(0.0, ts.e_p) * table.g(ts.y_b));
    }
    return j;
}

std::vector<JSegment> invariant_segments(const Geometry& g,
                                         const std::vector<TraceSample>& trace,
                                         const std::vector<double>& j) {
    std::vector<JSegment> segs;
    const bool rob = is_rob(g);
    const std::size_t n = trace.size();
    std::size_t i = 0;
    while (i < n) {
        const geom::Region tag = invariant_branch(rob, trace[i].region);
        std::size_t e = i + 1;
        while (e < n && invariant_branch(rob, trace[e].region) == tag) ++e;
        JSegment seg;
        seg.begin = i;
        seg.end = e;
        seg.tag = tag;
        const std::size_t len = e - i;
        const std::size_t head = std::max<std::size_t>(1, len / 10);
        double h = 0, t = 0, m = 0;
        for (std::size_t k = i; k < i + head; ++k) h += j[k];
        for (std::size_t k = e - head; k < e; ++k) t += j[k];
        for (std::size_t k = i; k < e; ++k) m += j[k];
        seg.j_head = h / head;
        seg.j_tail = t / head;
        seg.j_mean = m / len;
        seg.drift_rel = std::abs(seg.j_tail - seg.j_head) /
                        std::max(1e-12, std::abs(seg.j_mean));
        segs.push_back(seg);
        i = e;
    }
    return segs;
}

TransientResult transient_time(const Series& s, double bar_period) {
    TransientResult res;
    if (s.t.size() < 2) return res;
    const double dt = s.t[1] - s.t[0];
    int window = static_cast<int>(std::lround(bar_period / dt));
    if (window % 2 == 0) ++window;
    window = std::max(1, window);
    const auto smooth = moving_average_abs(s.delta_ke, window);
    const double half = 0.5 * smooth.front();
    for (std::size_t i = 0; i < smooth.size(); ++i) {
        if (smooth[i] <= half) {
            res.t_half = s.t[i];
            res.crossed = true;
            return res;
        }
    }
    return res;
}

} // namespace springy::ens
