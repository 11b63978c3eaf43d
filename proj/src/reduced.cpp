#include "springy/reduced.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>

#include "springy/rootfind.hpp"

namespace springy::reduced {

namespace odeint = boost::numeric::odeint;
using Quad = boost::math::quadrature::gauss_kronrod<double, 15>;

// ---------------------------------------------------------------------------
// Averaged laws
// ---------------------------------------------------------------------------

double ergodic_rhs(double y_b, double v_b, const geom::MushroomGeometry& g,
                   double E, int d) {
    const double e_b = 0.5 * (g.M * v_b * v_b + g.k * y_b * y_b);
    if (e_b > E * (1.0 + 1e-12))
        throw SimulationError("ergodic_rhs: bar energy exceeds the total energy");
    const double e_p = std::max(0.0, E - e_b);
    const double vc = geom::v_chaotic(g, y_b);
    const double force = (2.0 / d) * e_p * geom::v_chaotic_deriv(g, y_b) / vc;
    return (-g.k * y_b + force) / g.M;
}

double u_effective(const geom::MushroomGeometry& g, double y_b, double J, int d) {
    const double vc = geom::v_chaotic(g, y_b);
    return 0.5 * g.k * y_b * y_b + std::pow(J / vc, 2.0 / d);
}

double u_effective(const geom::RobGeometry& g, double y_b, double J, geom::Side side) {
    const double len = geom::rob_chamber_length(g, y_b, side);
    return 0.5 * g.k * y_b * y_b + sqr(J / len);
}

double rob_branch_acceleration(const geom::RobGeometry& g, double y_b, double J,
                               geom::Side side) {
    const double len = geom::rob_chamber_length(g, y_b, side);
    const double dlen = side == geom::Side::Up ? -1.0 : 1.0;
    // F = -dE_p/dy with E_p = J^2 / len^2
    const double force = 2.0 * J * J * dlen / (len * len * len);
    return (-g.k * y_b + force) / g.M;
}

double pressure_equilibrium(const geom::MushroomGeometry& g, double E) {
    const double amp = std::sqrt(2.0 * E / g.k) * (1.0 - 1e-9);
    auto residual = [&](double y) {
        return g.k * y - geom::v_total_deriv(g, y) / geom::v_chaotic(g, y) *
                             (E - 0.5 * g.k * y * y);
    };
    const double ra = residual(-amp), rb = residual(amp);
    if (!(ra < 0.0 && rb > 0.0))
        throw SimulationError("pressure_equilibrium: no interior equilibrium");
    return brent(residual, -amp, amp, ra, rb, 1e-12);
}

namespace {

// Bar positions where the throat protocol clamps; V_c' jumps there.
std::vector<double> protocol_kinks(const geom::MushroomGeometry& g) {
    std::vector<double> ks;
    if (g.stadium_mode) return ks;
    const double dw = g.throat.w_max - g.throat.w_min;
    if (dw <= 0.0) return ks;
    if (g.throat.c_below > 0.0)
        ks.push_back(g.throat.y_f - std::sqrt(dw / g.throat.c_below));
    if (g.throat.c_above > 0.0)
        ks.push_back(g.throat.y_f + std::sqrt(dw / g.throat.c_above));
    std::sort(ks.begin(), ks.end());
    return ks;
}

double lng_integrand(const geom::MushroomGeometry& g, double y) {
    return geom::v_total_deriv(g, y) / geom::v_chaotic(g, y);
}

} // namespace

double ln_g_direct(const geom::MushroomGeometry& g, double y_b) {
    if (y_b == 0.0) return 0.0;
    const double a = std::min(0.0, y_b), b = std::max(0.0, y_b);
    std::vector<double> pts{a};
    for (double kk : protocol_kinks(g))
        if (kk > a && kk < b) pts.push_back(kk);
    pts.push_back(b);
    double total = 0.0;
    auto f = [&](double s) { return lng_integrand(g, s); };
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
        total += Quad::integrate(f, pts[i], pts[i + 1], 12, 1e-11);
    return y_b > 0.0 ? total : -total;
}

double g_factor(const geom::MushroomGeometry& g, double y_b) {
    return std::exp(ln_g_direct(g, y_b));
}

double capture_hazard(const geom::MushroomGeometry& g, double y_b, double v_b) {
    const double w = geom::w_of_yb(g, y_b);
    const double rate = geom::v_ell_deriv_w(g, w) * geom::w_of_yb_deriv(g, y_b) *
                        v_b / geom::v_chaotic(g, y_b);
    return std::max(0.0, rate);
}

double j_ceiling(const geom::MushroomGeometry& g, double E, int d) {
    const double y_f = pressure_equilibrium(g, E);
    const double e_p = E - 0.5 * g.k * y_f * y_f;
    return std::pow(e_p, 0.5 * d) * geom::v_chaotic(g, y_f);
}

// ---------------------------------------------------------------------------
// GTable
// ---------------------------------------------------------------------------

GTable::GTable(const geom::MushroomGeometry& g, int cells) {
    const double amp = g.max_bar_amplitude();
    lo_ = -amp * (1.0 + 1e-3);
    hi_ = amp * (1.0 + 1e-3);

    // section boundaries: range ends, the origin, and protocol kinks
    std::vector<double> bounds{lo_, 0.0, hi_};
    for (double kk : protocol_kinks(g))
        if (kk > lo_ && kk < hi_) bounds.push_back(kk);
    std::sort(bounds.begin(), bounds.end());
    bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());

    const double span = hi_ - lo_;
    int first = 0;
    for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
        const double len = bounds[i + 1] - bounds[i];
        const int nc = std::max(8, static_cast<int>(std::lround(cells * len / span)));
        sections_.push_back({bounds[i], len / nc, first, nc});
        first += nc + 1;
    }

    node_y_.resize(first);
    node_val_.resize(first);
    node_slope_.resize(first);

    auto f = [&](double s) { return lng_integrand(g, s); };
    // cumulative integral from lo_, rebased so that ln G(0) = 0 exactly
    double acc = 0.0;
    double base = 0.0;
    for (const auto& sec : sections_) {
        for (int j = 0; j <= sec.cells; ++j) {
            const double y = (j == sec.cells) ? sec.y0 + sec.dy * sec.cells
                                              : sec.y0 + sec.dy * j;
            const int idx = sec.first + j;
            if (j > 0) acc += Quad::integrate(f, y - sec.dy, y, 5, 1e-13);
            node_y_[idx] = y;
            node_val_[idx] = acc;
            node_slope_[idx] = f(y);
            if (y == 0.0) base = acc;
        }
    }
    for (auto& v : node_val_) v -= base;
}

double GTable::ln_g(double y_b) const {
    const double y = std::clamp(y_b, lo_, hi_);
    const Section* sec = &sections_.back();
    for (const auto& s : sections_) {
        if (y <= s.y0 + s.dy * s.cells) {
            sec = &s;
            break;
        }
    }
    int j = static_cast<int>((y - sec->y0) / sec->dy);
    j = std::clamp(j, 0, sec->cells - 1);
    const int i0 = sec->first + j;
    const double t = (y - node_y_[i0]) / sec->dy;
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
    return h00 * node_val_[i0] + h10 * sec->dy * node_slope_[i0] +
           h01 * node_val_[i0 + 1] + h11 * sec->dy * node_slope_[i0 + 1];
}

// ---------------------------------------------------------------------------
// Model drivers
// ---------------------------------------------------------------------------

namespace {

using State2 = std::array<double, 2>;
using State3 = std::array<double, 3>;

template <typename State>
using DenseStepper =
    typename odeint::result_of::make_dense_output<odeint::runge_kutta_dopri5<State>>::type;

template <typename State>
DenseStepper<State> make_stepper() {
    return odeint::make_dense_output(1e-12, 1e-9, odeint::runge_kutta_dopri5<State>());
}

} // namespace

struct RobReducedModel::Impl {
    DenseStepper<State2> stepper = make_stepper<State2>();
};

RobReducedModel::RobReducedModel(const geom::RobGeometry& g)
    : geom_(g), impl_(new Impl) {
    geom_.validate();
}
RobReducedModel::~RobReducedModel() = default;
RobReducedModel::RobReducedModel(RobReducedModel&&) noexcept = default;
RobReducedModel& RobReducedModel::operator=(RobReducedModel&&) noexcept = default;

namespace {

TraceSample reduced_sample(double t, double y, double v, double k, double M,
                           double E, geom::Region branch) {
    TraceSample ts;
    ts.t = t;
    ts.y_b = y;
    ts.v_b = v;
    ts.e_b = 0.5 * (M * v * v + k * y * y);
    ts.e_p = std::max(0.0, E - ts.e_b);
    ts.region = branch;
    return ts;
}

} // namespace

void RobReducedModel::flow_chamber(ReducedState& s, geom::Side side, double t1,
                                   SampleGrid* grid) {
    if (!(t1 > s.t)) return;
    const double J = s.J;
    auto sys = [&](const State2& x, State2& dxdt, double) {
        dxdt[0] = x[1];
        dxdt[1] = rob_branch_acceleration(geom_, x[0], J, side);
    };
    auto& st = impl_->stepper;
    State2 x{s.y_b, s.v_b};
    st.initialize(x, s.t, 0.05 * geom_.bar_period());
    while (st.current_time() < t1) {
        st.do_step(sys);
        const double frontier = std::min(st.current_time(), t1);
        if (grid && grid->active()) {
            while (grid->next() <= frontier) {
                State2 xi;
                st.calc_state(grid->next(), xi);
                (*grid->rec)(reduced_sample(grid->next(), xi[0], xi[1], geom_.k,
                                            geom_.M, geom_.E, s.branch));
                ++grid->n;
            }
        }
    }
    State2 xf;
    st.calc_state(t1, xf);
    s.y_b = xf[0];
    s.v_b = xf[1];
    s.t = t1;
}

void RobReducedModel::flow_free(ReducedState& s, double t1, SampleGrid* grid) {
    if (!(t1 > s.t)) return;
    const double w = geom_.omega();
    const double y0 = s.y_b, v0 = s.v_b, t0 = s.t;
    auto pos = [&](double dt) { return y0 * std::cos(w * dt) + (v0 / w) * std::sin(w * dt); };
    auto vel = [&](double dt) { return -y0 * w * std::sin(w * dt) + v0 * std::cos(w * dt); };
    if (grid && grid->active()) {
        while (grid->next() <= t1) {
            const double dt = grid->next() - t0;
            (*grid->rec)(reduced_sample(grid->next(), pos(dt), vel(dt), geom_.k,
                                        geom_.M, geom_.E, geom::Region::FreeSpan));
            ++grid->n;
        }
    }
    const double dt = t1 - t0;
    s.y_b = pos(dt);
    s.v_b = vel(dt);
    s.t = t1;
}

void RobReducedModel::advance_period(ReducedState& s, Rng& rng, double t_cap,
                                     SampleGrid* grid) {
    const double t_start = s.t;
    const double t_mid = t_start + geom_.tau() * geom_.period();
    const double t_stop = t_start + geom_.period();

    const double e_b = s.bar_energy(geom_.k, geom_.M);
    const double beta = geom::rob_chamber_length(geom_, s.y_b, geom::Side::Up) / geom_.h;
    const geom::Side side = rng.uniform() < beta ? geom::Side::Up : geom::Side::Down;
    const double e_p = std::max(0.0, geom_.E - e_b);
    s.J = std::sqrt(e_p) * geom::rob_chamber_length(geom_, s.y_b, side);
    s.branch = side == geom::Side::Up ? geom::Region::ChamberUp
                                      : geom::Region::ChamberDown;

    flow_chamber(s, side, std::min(t_mid, t_cap), grid);
    if (t_cap > t_mid) {
        s.branch = geom::Region::FreeSpan;
        s.J = s.bar_energy(geom_.k, geom_.M);
        flow_free(s, std::min(t_stop, t_cap), grid);
    }
}

void RobReducedModel::step(ReducedState& s, Rng& rng) {
    advance_period(s, rng, s.t + geom_.period(), nullptr);
}

void RobReducedModel::run(ReducedState& s, Rng& rng, double t_end, double sample_dt,
                          const Recorder& rec) {
    SampleGrid grid{s.t, sample_dt, 0, rec ? &rec : nullptr};
    SampleGrid* gp = (rec && sample_dt > 0.0) ? &grid : nullptr;
    while (s.t < t_end)
        advance_period(s, rng, std::min(s.t + geom_.period(), t_end), gp);
}

void RobReducedModel::integrate_branch(double& y_b, double& v_b, geom::Side side,
                                       double J, double duration) {
    ReducedState s;
    s.y_b = y_b;
    s.v_b = v_b;
    s.J = J;
    s.branch = side == geom::Side::Up ? geom::Region::ChamberUp
                                      : geom::Region::ChamberDown;
    flow_chamber(s, side, duration, nullptr);
    y_b = s.y_b;
    v_b = s.v_b;
}

// ---------------------------------------------------------------------------

struct MushroomReducedModel::Impl {
    DenseStepper<State3> stepper = make_stepper<State3>();
};

MushroomReducedModel::MushroomReducedModel(const geom::MushroomGeometry& g)
    : geom_(g), gtable_(new GTable(g)), impl_(new Impl) {
    geom_.validate();
}
MushroomReducedModel::~MushroomReducedModel() = default;
MushroomReducedModel::MushroomReducedModel(MushroomReducedModel&&) noexcept = default;
MushroomReducedModel& MushroomReducedModel::operator=(MushroomReducedModel&&) noexcept =
    default;

double MushroomReducedModel::release_delay(const ReducedState& s) const {
    const double w = geom_.omega();
    const double y0 = s.y_b, v0 = s.v_b;
    auto q = [&](double dt) {
        const double y = y0 * std::cos(w * dt) + (v0 / w) * std::sin(w * dt);
        return geom::w_of_yb(geom_, y) - s.w_c;
    };
    const double period = geom_.bar_period();
    const int n = 512;
    const double step = period * (1.0 + 1e-9) / n;
    double t_prev = 0.0;
    bool seen_negative = false;
    // probe close to the capture instant so a shallow dip is not stepped over
    for (double frac : {1.0 / 4096.0, 1.0 / 512.0, 1.0 / 64.0, 1.0 / 8.0}) {
        if (q(step * frac) < 0.0) {
            seen_negative = true;
            t_prev = step * frac;
            break;
        }
    }
    for (int i = 1; i <= n; ++i) {
        const double t = i * step;
        const double qi = q(t);
        if (qi < 0.0) {
            seen_negative = true;
            t_prev = t;
            continue;
        }
        if (seen_negative) // first return to the capture width, throat widening
            return brent(q, t_prev, t, 1e-14);
        t_prev = t;
    }
    throw SimulationError("captured particle is never released: the free bar orbit "
                          "does not restore the capture width");
}

void MushroomReducedModel::flow_captured(ReducedState& s, double t1, SampleGrid* grid) {
    if (!(t1 > s.t)) return;
    const double w = geom_.omega();
    const double y0 = s.y_b, v0 = s.v_b, t0 = s.t;
    auto pos = [&](double dt) { return y0 * std::cos(w * dt) + (v0 / w) * std::sin(w * dt); };
    auto vel = [&](double dt) { return -y0 * w * std::sin(w * dt) + v0 * std::cos(w * dt); };
    if (grid && grid->active()) {
        while (grid->next() <= t1) {
            const double dt = grid->next() - t0;
            (*grid->rec)(reduced_sample(grid->next(), pos(dt), vel(dt), geom_.k,
                                        geom_.M, geom_.E, geom::Region::Captured));
            ++grid->n;
        }
    }
    const double dt = t1 - t0;
    s.y_b = pos(dt);
    s.v_b = vel(dt);
    s.t = t1;
}

void MushroomReducedModel::flow_chaotic(ReducedState& s, Rng& rng, double t1,
                                        SampleGrid* grid) {
    if (!(t1 > s.t)) return;
    if (s.hazard_threshold < 0.0) {
        s.hazard_threshold = rng.exponential();
        s.hazard_accum = 0.0;
    }
    // flattened RHS: one V_c evaluation shared by the force and the hazard
    const double h = geom_.h, ell0 = geom_.ell0, tt = geom_.tan_theta;
    const double k = geom_.k, M = geom_.M, E = geom_.E;
    const double two_pi = 2.0 * kPi;
    const double cap_vol = kPi * kPi * h * h;
    auto sys = [&](const State3& x, State3& dxdt, double) {
        const double y = x[0], v = x[1];
        const double ell = ell0 - y;
        const double vtot = cap_vol + two_pi * (2.0 * h * ell - ell * ell * tt);
        const double vtot_d = -two_pi * (2.0 * h - 2.0 * ell * tt);
        double vell = 0.0, hazard_num = 0.0;
        if (!geom_.stadium_mode) {
            const double d = y - geom_.throat.y_f;
            const double c = (d < 0.0) ? geom_.throat.c_below : geom_.throat.c_above;
            const double w_raw = geom_.throat.w_min + c * d * d;
            const double w = std::min(geom_.throat.w_max, w_raw);
            if (w < h) {
                const double s = w / h;
                const double root = std::sqrt(1.0 - s * s);
                vell = two_pi * h * h * (std::acos(s) - s * root);
                if (w_raw < geom_.throat.w_max) {
                    // dV_ell/dt = dV_ell/dw * dw/dy * v; positive while narrowing
                    hazard_num = (-4.0 * kPi * h * root) * (2.0 * c * d) * v;
                }
            }
        }
        const double vc = vtot - vell;
        const double e_p = E - 0.5 * (M * v * v + k * y * y);
        dxdt[0] = v;
        dxdt[1] = (-k * y + vtot_d / vc * e_p) / M;
        dxdt[2] = hazard_num > 0.0 ? hazard_num / vc : 0.0;
    };
    auto& st = impl_->stepper;
    State3 x{s.y_b, s.v_b, s.hazard_accum};
    st.initialize(x, s.t, 0.02 * geom_.bar_period());
    const double theta = s.hazard_threshold;
    while (st.current_time() < t1) {
        st.do_step(sys);
        const double t_prev = st.previous_time();
        const double frontier = std::min(st.current_time(), t1);
        State3 xe;
        st.calc_state(frontier, xe);
        if (xe[2] >= theta) {
            // capture inside (t_prev, frontier]: localize on the dense output
            auto over = [&](double t) {
                State3 xi;
                st.calc_state(t, xi);
                return xi[2] - theta;
            };
            const double lo = std::max(t_prev, s.t);
            const double over_lo = over(lo);
            const double t_c =
                over_lo >= 0.0 ? lo
                               : brent(over, lo, frontier, 1e-13 * geom_.bar_period());
            if (grid && grid->active()) {
                while (grid->next() <= t_c) {
                    State3 xi;
                    st.calc_state(grid->next(), xi);
                    (*grid->rec)(reduced_sample(grid->next(), xi[0], xi[1], geom_.k,
                                                geom_.M, geom_.E, geom::Region::Chaotic));
                    ++grid->n;
                }
            }
            State3 xc;
            st.calc_state(t_c, xc);
            s.y_b = xc[0];
            s.v_b = xc[1];
            s.t = t_c;
            s.w_c = geom::w_of_yb(geom_, s.y_b);
            s.branch = geom::Region::Captured;
            s.J = s.bar_energy(geom_.k, geom_.M);
            s.hazard_threshold = -1.0;
            s.hazard_accum = 0.0;
            s.t_release = s.t + release_delay(s);
            if (log_events_) jump_log_.push_back({s.t, s.y_b, s.v_b, s.w_c, true});
            return;
        }
        if (grid && grid->active()) {
            while (grid->next() <= frontier) {
                State3 xi;
                st.calc_state(grid->next(), xi);
                (*grid->rec)(reduced_sample(grid->next(), xi[0], xi[1], geom_.k,
                                            geom_.M, geom_.E, geom::Region::Chaotic));
                ++grid->n;
            }
        }
    }
    State3 xf;
    st.calc_state(t1, xf);
    s.y_b = xf[0];
    s.v_b = xf[1];
    s.hazard_accum = xf[2];
    s.t = t1;
}

void MushroomReducedModel::advance_until(ReducedState& s, Rng& rng, double t_cap,
                                         SampleGrid* grid) {
    while (s.t < t_cap) {
        if (s.branch == geom::Region::Captured) {
            const double t1 = std::min(s.t_release, t_cap);
            flow_captured(s, t1, grid);
            if (s.t >= s.t_release) {
                s.branch = geom::Region::Chaotic;
                s.J = std::max(0.0, geom_.E - s.bar_energy(geom_.k, geom_.M)) *
                      gtable_->g(s.y_b);
                if (log_events_) jump_log_.push_back({s.t, s.y_b, s.v_b, s.w_c, false});
            }
        } else {
            s.branch = geom::Region::Chaotic;
            flow_chaotic(s, rng, t_cap, grid);
        }
    }
}

void MushroomReducedModel::step(ReducedState& s, Rng& rng, double dt_max) {
    advance_until(s, rng, s.t + dt_max, nullptr);
}

void MushroomReducedModel::run(ReducedState& s, Rng& rng, double t_end,
                               double sample_dt, const Recorder& rec) {
    SampleGrid grid{s.t, sample_dt, 0, rec ? &rec : nullptr};
    SampleGrid* gp = (rec && sample_dt > 0.0) ? &grid : nullptr;
    advance_until(s, rng, t_end, gp);
}

} // namespace springy::reduced
