#include "springy/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "springy/rootfind.hpp"

namespace springy::dyn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Wall ids. Diagnostic only; reflections key off the id.
enum RobWall { kRobLeft = 0, kRobRight, kRobTop, kRobBottom };
enum MushWall { kArc = 0, kStemRight, kStemLeft };

// First root of g in [a,b] given endpoint values and derivatives. Splits at
// an interior extremum when the derivative changes sign, so each monotone
// piece holds at most one root.
template <typename G, typename GP>
std::optional<double> first_root_in(G&& g, GP&& gp, double a, double ga, double gpa,
                                    double b, double gb, double gpb, double tol,
                                    int depth) {
    if (depth > 0 && ((gpa < 0.0) != (gpb < 0.0))) {
        const double tm = brent(gp, a, b, gpa, gpb, tol);
        const double gm = g(tm);
        if ((ga > 0.0) != (gm > 0.0) || gm == 0.0) {
            if (auto r = first_root_in(g, gp, a, ga, gpa, tm, gm, gp(tm), tol, depth - 1))
                return r;
            return brent(g, a, tm, ga, gm, tol);
        }
        if ((gm > 0.0) != (gb > 0.0) || gb == 0.0) {
            if (auto r = first_root_in(g, gp, tm, gm, gp(tm), b, gb, gpb, tol, depth - 1))
                return r;
            return brent(g, tm, b, gm, gb, tol);
        }
        return std::nullopt;
    }
    if ((ga > 0.0) != (gb > 0.0) || gb == 0.0) return brent(g, a, b, ga, gb, tol);
    return std::nullopt;
}

} // namespace

std::optional<double> next_face_hit(double y0, double v, const BarState& bar,
                                    double face_offset, int sigma, double horizon,
                                    const SimOptions& opt) {
    if (!(horizon > 0.0)) return std::nullopt;
    const double w = bar.omega();
    const double amp = std::hypot(bar.y_b, bar.v_b / w);
    if (sigma > 0) {
        if (y0 + std::min(0.0, v) * horizon > face_offset + amp) return std::nullopt;
    } else {
        if (y0 + std::max(0.0, v) * horizon < face_offset - amp) return std::nullopt;
    }

    const double tol = opt.root_tol_factor * bar.period();
    auto g = [&](double t) {
        return sigma * (y0 + v * t - face_offset - bar.position_at(t));
    };
    auto gp = [&](double t) { return sigma * (v - bar.velocity_at(t)); };

    const double snap = 1e-12 * std::max({1.0, std::abs(y0), amp});

    double t_begin = 0.0;
    double g_begin = g(0.0);
    if (std::abs(g_begin) <= snap) {
        // Start on the face (typical right after an impact).
        double d = gp(0.0);
        if (d == 0.0) d = sigma * w * w * bar.y_b; // fall back to face acceleration
        if (d < 0.0) return tol; // face still pressing in: chattering contact
        // walk forward until clear of the face
        double te = tol;
        while (te < horizon) {
            const double ge = g(te);
            if (ge > snap) {
                t_begin = te;
                g_begin = ge;
                break;
            }
            if (ge < -snap) return te; // overtaken within rounding of the impact
            te *= 4.0;
        }
        if (t_begin == 0.0) return std::nullopt; // co-moving with the face
    }

    const double dt = std::min(0.25 * bar.period(), horizon) / 8.0;
    double a = t_begin, ga = g_begin, gpa = gp(a);
    while (a < horizon) {
        const double b = std::min(a + dt, horizon);
        const double gb = g(b), gpb = gp(b);
        if (auto r = first_root_in(g, gp, a, ga, gpa, b, gb, gpb, tol, 3)) {
            if (*r <= horizon) return *r;
            return std::nullopt;
        }
        a = b;
        ga = gb;
        gpa = gpb;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Rectangle with oscillating bar
// ---------------------------------------------------------------------------

RobSimulator::RobSimulator(const geom::RobGeometry& g, SimOptions opt)
    : geom_(g), opt_(opt) {
    geom_.validate();
    root_tol_ = opt_.root_tol_factor * geom_.bar_period();
}

TraceSample RobSimulator::sample(const SystemState& s) const {
    TraceSample ts;
    ts.t = s.t;
    ts.y_b = s.bar.y_b;
    ts.v_b = s.bar.v_b;
    ts.e_b = s.bar.energy();
    ts.e_p = 0.5 * s.particle.m * s.particle.v * s.particle.v;
    ts.region = s.region;
    return ts;
}

void RobSimulator::guard(SystemState& s) {
    auto& p = s.particle;
    const double half_h = 0.5 * geom_.h;
    const double tol = opt_.penetration_tol;
    int repairs = 0;
    auto repair = [&](double& coord, double target) {
        coord = target;
        ++repairs;
    };
    if (p.x < -tol) repair(p.x, 0.0);
    if (p.x > geom_.L + tol) repair(p.x, geom_.L);
    if (p.y > half_h + tol) repair(p.y, half_h);
    if (p.y < -half_h - tol) repair(p.y, -half_h);
    // region retags only strictly past the bar-tip plane; the crossing
    // handler owns the boundary point itself
    if (s.region == geom::Region::FreeSpan) {
        if (p.x < geom_.lambda - tol) {
            s.region = p.y >= s.bar.y_b ? geom::Region::ChamberUp
                                        : geom::Region::ChamberDown;
            ++repairs;
        }
    } else if (p.x > geom_.lambda + tol) {
        s.region = geom::Region::FreeSpan;
        ++repairs;
    } else {
        if (s.region == geom::Region::ChamberUp && p.y < s.bar.y_b - tol)
            repair(p.y, s.bar.y_b);
        if (s.region == geom::Region::ChamberDown && p.y > s.bar.y_b + tol)
            repair(p.y, s.bar.y_b);
    }
    if (repairs > 0) {
        projections_ += repairs;
        if (projections_ > opt_.max_projections)
            throw SimulationError("too many boundary repairs; collision detection "
                                  "is losing events");
    }
}

Event RobSimulator::advance(SystemState& s, double horizon) {
    auto& p = s.particle;
    const double dt_max = horizon - s.t;
    if (!(dt_max > 0.0)) return {Event::Kind::HorizonReached, s.t, -1};

    const double half_h = 0.5 * geom_.h;
    double best = dt_max;
    Event::Kind kind = Event::Kind::HorizonReached;
    int wall = -1;
    auto consider = [&](double t, Event::Kind k, int w) {
        if (t > 0.0 && t < best) {
            best = t;
            kind = k;
            wall = w;
        }
    };

    const bool in_chamber = s.region != geom::Region::FreeSpan;
    if (in_chamber) {
        if (p.u < 0.0) consider(p.x / -p.u, Event::Kind::WallHit, kRobLeft);
        if (p.u > 0.0) consider((geom_.lambda - p.x) / p.u, Event::Kind::Crossing, -1);
        if (s.region == geom::Region::ChamberUp) {
            if (p.v > 0.0) consider((half_h - p.y) / p.v, Event::Kind::WallHit, kRobTop);
        } else {
            if (p.v < 0.0)
                consider((-half_h - p.y) / p.v, Event::Kind::WallHit, kRobBottom);
        }
        const int sigma = s.region == geom::Region::ChamberUp ? 1 : -1;
        if (auto hit = next_face_hit(p.y, p.v, s.bar, 0.0, sigma, best, opt_)) {
            best = *hit;
            kind = Event::Kind::BarHit;
            wall = -1;
        }
    } else {
        if (p.u > 0.0) consider((geom_.L - p.x) / p.u, Event::Kind::WallHit, kRobRight);
        if (p.u < 0.0) consider((p.x - geom_.lambda) / -p.u, Event::Kind::Crossing, -1);
        if (p.v > 0.0) consider((half_h - p.y) / p.v, Event::Kind::WallHit, kRobTop);
        if (p.v < 0.0) consider((-half_h - p.y) / p.v, Event::Kind::WallHit, kRobBottom);
    }

    p.x += p.u * best;
    p.y += p.v * best;
    s.bar.advance(best);
    s.t += best;

    switch (kind) {
        case Event::Kind::WallHit:
            switch (wall) {
                case kRobLeft: p.x = 0.0; p.u = -p.u; break;
                case kRobRight: p.x = geom_.L; p.u = -p.u; break;
                case kRobTop: p.y = half_h; p.v = -p.v; break;
                case kRobBottom: p.y = -half_h; p.v = -p.v; break;
            }
            break;
        case Event::Kind::Crossing:
            p.x = geom_.lambda;
            if (p.u > 0.0) {
                s.region = geom::Region::FreeSpan;
            } else {
                if (p.y > s.bar.y_b)
                    s.region = geom::Region::ChamberUp;
                else if (p.y < s.bar.y_b)
                    s.region = geom::Region::ChamberDown;
                else
                    s.region = p.v >= s.bar.v_b ? geom::Region::ChamberUp
                                                : geom::Region::ChamberDown;
            }
            break;
        case Event::Kind::BarHit: {
            p.y = s.bar.y_b;
            auto [vp, vb] = elastic_bar_collision(p.v, s.bar.v_b, p.m);
            p.v = vp;
            s.bar.v_b = vb;
            break;
        }
        default:
            break;
    }

    if (kind != Event::Kind::HorizonReached) {
        if (best < root_tol_) {
            if (++stall_count_ > opt_.max_chain)
                throw SimulationError("event stall: no time progress over chained events");
        } else {
            stall_count_ = 0;
        }
        guard(s);
    }
    return {kind, s.t, wall};
}

RunStats RobSimulator::run(SystemState& s, double t_end, double sample_dt,
                           const Recorder& rec) {
    stall_count_ = 0;
    projections_ = 0;
    RunStats st;
    st.energy_initial = system_energy(s);
    const double t0 = s.t;
    const bool sampling = sample_dt > 0.0 && rec;
    long n_sample = 0;
    if (sampling) rec(sample(s));
    while (s.t < t_end) {
        double horizon = t_end;
        double t_next = kInf;
        if (sampling) {
            t_next = t0 + (n_sample + 1) * sample_dt;
            horizon = std::min(horizon, t_next);
        }
        const Event e = advance(s, horizon);
        if (e.kind == Event::Kind::HorizonReached) {
            if (sampling && s.t >= t_next) {
                ++n_sample;
                rec(sample(s));
            }
        } else {
            ++st.n_events;
            if (e.kind == Event::Kind::BarHit) ++st.n_bar_hits;
        }
    }
    st.n_projections = projections_;
    st.energy_final = system_energy(s);
    return st;
}

// ---------------------------------------------------------------------------
// Slanted mushroom / stadium
// ---------------------------------------------------------------------------

MushroomSimulator::MushroomSimulator(const geom::MushroomGeometry& g, SimOptions opt)
    : geom_(g), opt_(opt) {
    geom_.validate();
    root_tol_ = opt_.root_tol_factor * geom_.bar_period();
}

bool MushroomSimulator::on_integrable_orbit(const SystemState& s) const {
    if (s.region != geom::Region::Cap) return false;
    const auto& p = s.particle;
    const double speed = std::hypot(p.u, p.v);
    if (speed == 0.0) return true;
    const double rho = std::abs(p.x * p.v - p.y * p.u) / speed;
    return rho >= geom::w_of_yb(geom_, s.bar.y_b);
}

TraceSample MushroomSimulator::sample(const SystemState& s) const {
    TraceSample ts;
    ts.t = s.t;
    ts.y_b = s.bar.y_b;
    ts.v_b = s.bar.v_b;
    ts.e_b = s.bar.energy();
    ts.e_p = 0.5 * s.particle.m * (s.particle.u * s.particle.u + s.particle.v * s.particle.v);
    ts.region = on_integrable_orbit(s) ? geom::Region::Captured : s.region;
    return ts;
}

void MushroomSimulator::guard(SystemState& s) {
    auto& p = s.particle;
    const double tol = opt_.penetration_tol;
    int repairs = 0;
    if (s.region == geom::Region::Cap) {
        const double r = std::hypot(p.x, p.y);
        if (r > geom_.h + tol) {
            const double f = geom_.h / r;
            p.x *= f;
            p.y *= f;
            ++repairs;
        }
        if (p.y < -tol) {
            p.y = 0.0;
            ++repairs;
        }
    } else {
        if (p.y > tol) {
            p.y = 0.0;
            ++repairs;
        }
        const double face = geom_.bar_face(s.bar.y_b);
        if (p.y < face - tol) {
            p.y = face;
            ++repairs;
        }
        const double hw = geom_.stem_half_width(std::min(p.y, 0.0));
        if (p.x > hw + tol) {
            p.x = hw;
            ++repairs;
        }
        if (p.x < -hw - tol) {
            p.x = -hw;
            ++repairs;
        }
    }
    if (repairs > 0) {
        projections_ += repairs;
        if (projections_ > opt_.max_projections)
            throw SimulationError("too many boundary repairs; collision detection "
                                  "is losing events");
    }
}

Event MushroomSimulator::advance(SystemState& s, double horizon) {
    auto& p = s.particle;
    const double dt_max = horizon - s.t;
    if (!(dt_max > 0.0)) return {Event::Kind::HorizonReached, s.t, -1};

    double best = dt_max;
    Event::Kind kind = Event::Kind::HorizonReached;
    int wall = -1;
    auto consider = [&](double t, Event::Kind k, int w) {
        if (t > 0.0 && t < best) {
            best = t;
            kind = k;
            wall = w;
        }
    };

    bool throat_candidate = false;
    if (s.region == geom::Region::Cap) {
        const double s2 = p.u * p.u + p.v * p.v;
        if (s2 > 0.0) {
            const double b = p.x * p.u + p.y * p.v;
            const double c0 = p.x * p.x + p.y * p.y - geom_.h * geom_.h;
            const double disc = std::max(0.0, b * b - s2 * c0);
            const double sq = std::sqrt(disc);
            const double t_arc = b <= 0.0 ? (-b + sq) / s2 : -c0 / (b + sq);
            consider(t_arc, Event::Kind::WallHit, kArc);
            if (p.v < 0.0) {
                const double t_line = -p.y / p.v;
                if (t_line > 0.0 && t_line < best) {
                    best = t_line;
                    kind = Event::Kind::Crossing;
                    wall = -1;
                    throat_candidate = true;
                }
            }
        }
    } else {
        const double tb = geom_.tan_theta;
        const double fr = p.x - p.y * tb - geom_.h;
        const double rr = p.u - p.v * tb;
        if (rr > 0.0) consider(-fr / rr, Event::Kind::WallHit, kStemRight);
        const double fl = -p.x - p.y * tb - geom_.h;
        const double rl = -p.u - p.v * tb;
        if (rl > 0.0) consider(-fl / rl, Event::Kind::WallHit, kStemLeft);
        if (p.v > 0.0) {
            const double t_line = -p.y / p.v;
            if (t_line > 0.0 && t_line < best) {
                best = t_line;
                kind = Event::Kind::Crossing;
                wall = -1;
                throat_candidate = true;
            }
        }
        if (auto hit = next_face_hit(p.y, p.v, s.bar, -geom_.ell0, 1, best, opt_)) {
            best = *hit;
            kind = Event::Kind::BarHit;
            wall = -1;
            throat_candidate = false;
        }
    }

    p.x += p.u * best;
    p.y += p.v * best;
    s.bar.advance(best);
    s.t += best;

    switch (kind) {
        case Event::Kind::WallHit:
            if (wall == kArc) {
                const double r = std::hypot(p.x, p.y);
                const double f = geom_.h / r;
                p.x *= f;
                p.y *= f;
                const double nx = p.x / geom_.h, ny = p.y / geom_.h;
                const double vn = p.u * nx + p.v * ny;
                p.u -= 2.0 * vn * nx;
                p.v -= 2.0 * vn * ny;
            } else {
                const double tb = geom_.tan_theta;
                const double norm = std::sqrt(1.0 + tb * tb);
                const double sx = wall == kStemRight ? 1.0 : -1.0;
                p.x = sx * geom_.stem_half_width(p.y);
                const double nx = sx / norm, ny = -tb / norm;
                const double vn = p.u * nx + p.v * ny;
                p.u -= 2.0 * vn * nx;
                p.v -= 2.0 * vn * ny;
            }
            break;
        case Event::Kind::Crossing: {
            (void)throat_candidate;
            p.y = 0.0;
            const double w = geom::w_of_yb(geom_, s.bar.y_b);
            if (std::abs(p.x) <= w) {
                s.region = s.region == geom::Region::Cap ? geom::Region::Stem
                                                         : geom::Region::Cap;
            } else {
                // closed throat: the lip reflects vertically
                p.v = -p.v;
                kind = Event::Kind::LipHit;
            }
            break;
        }
        case Event::Kind::BarHit: {
            p.y = geom_.bar_face(s.bar.y_b);
            auto [vp, vb] = elastic_bar_collision(p.v, s.bar.v_b, p.m);
            p.v = vp;
            s.bar.v_b = vb;
            break;
        }
        default:
            break;
    }

    if (kind != Event::Kind::HorizonReached) {
        if (best < root_tol_) {
            if (++stall_count_ > opt_.max_chain)
                throw SimulationError("event stall: no time progress over chained events");
        } else {
            stall_count_ = 0;
        }
        guard(s);
    }
    return {kind, s.t, wall};
}

RunStats MushroomSimulator::run(SystemState& s, double t_end, double sample_dt,
                                const Recorder& rec) {
    stall_count_ = 0;
    projections_ = 0;
    RunStats st;
    st.energy_initial = system_energy(s);
    const double t0 = s.t;
    const bool sampling = sample_dt > 0.0 && rec;
    long n_sample = 0;
    if (sampling) rec(sample(s));
    while (s.t < t_end) {
        double horizon = t_end;
        double t_next = kInf;
        if (sampling) {
            t_next = t0 + (n_sample + 1) * sample_dt;
            horizon = std::min(horizon, t_next);
        }
        const Event e = advance(s, horizon);
        if (e.kind == Event::Kind::HorizonReached) {
            if (sampling && s.t >= t_next) {
                ++n_sample;
                rec(sample(s));
            }
        } else {
            ++st.n_events;
            if (e.kind == Event::Kind::BarHit) ++st.n_bar_hits;
        }
    }
    st.n_projections = projections_;
    st.energy_final = system_energy(s);
    return st;
}

} // namespace springy::dyn
