#ifndef SPRINGY_DYNAMICS_HPP
#define SPRINGY_DYNAMICS_HPP

#include <cstdint>
#include <optional>
#include <utility>

#include "springy/geometry.hpp"
#include "springy/trace.hpp"

namespace springy::dyn {

struct ParticleState {
    double x = 0.0, y = 0.0; // position
    double u = 0.0, v = 0.0; // velocity
    double m = 1.0;          // mass, relative to the bar mass
};

struct BarState {
    double y_b = 0.0; // displacement from spring equilibrium
    double v_b = 0.0;
    double k = 1.0;
    double M = 1.0;

    double omega() const { return std::sqrt(k / M); }
    double period() const { return 2.0 * kPi / omega(); }
    double energy() const { return 0.5 * (M * v_b * v_b + k * y_b * y_b); }
    double amplitude() const { return std::sqrt(2.0 * energy() / k); }

    // Exact harmonic flight; the bar energy is invariant up to rounding.
    void advance(double dt) {
        const double w = omega();
        const double c = std::cos(w * dt), s = std::sin(w * dt);
        const double y = y_b, v = v_b;
        y_b = y * c + (v / w) * s;
        v_b = -y * w * s + v * c;
    }

    double position_at(double dt) const {
        const double w = omega();
        return y_b * std::cos(w * dt) + (v_b / w) * std::sin(w * dt);
    }
    double velocity_at(double dt) const {
        const double w = omega();
        return -y_b * w * std::sin(w * dt) + v_b * std::cos(w * dt);
    }
};

struct SystemState {
    ParticleState particle;
    BarState bar;
    double t = 0.0;
    geom::Region region = geom::Region::FreeSpan;
};

// Elastic exchange of the vertical velocity components at a bar impact.
// Conserves m*v_p + M*v_b and m*v_p^2 + M*v_b^2; the relative velocity is
// exactly reversed.
inline std::pair<double, double> elastic_bar_collision(double v_p, double v_b,
                                                       double m) {
    const double inv = 1.0 / (1.0 + m);
    return {(2.0 * v_b - (1.0 - m) * v_p) * inv,
            ((1.0 - m) * v_b + 2.0 * m * v_p) * inv};
}

struct Event {
    enum class Kind : std::uint8_t {
        WallHit,        // specular reflection at a static wall (id names it)
        BarHit,         // elastic exchange with the moving bar
        Crossing,       // region retag (bar tip plane or open throat)
        LipHit,         // closed throat: vertical reflection at the lip line
        SampleTick,
        HorizonReached, // no event before the requested horizon
    };
    Kind kind = Kind::HorizonReached;
    double t = 0.0; // absolute event time
    int wall = -1;  // wall id for WallHit (per-geometry numbering)
};

struct SimOptions {
    double penetration_tol = 1e-9;  // admissible boundary penetration
    double root_tol_factor = 1e-12; // collision-time tolerance, x bar period
    double graze_tol = 1e-12;       // relative speed below which a hit is grazing
    long max_chain = 1000000;       // events allowed without time progress
    long max_projections = 1000;    // boundary repairs allowed per trajectory
};

struct RunStats {
    long n_events = 0;
    long n_bar_hits = 0;
    long n_projections = 0;
    double energy_initial = 0.0;
    double energy_final = 0.0;

    double energy_drift() const {
        return std::abs(energy_final - energy_initial) /
               std::max(1e-300, std::abs(energy_initial));
    }
};

// Earliest time in (0, horizon] at which the line y0 + v*t meets the moving
// face offset + (harmonic flight of bar). sigma = +1 when the particle sits
// above the face. Roots are bracketed by scanning at most an eighth of a
// quarter bar period and checking interior minima, then refined with Brent.
std::optional<double> next_face_hit(double y0, double v, const BarState& bar,
                                    double face_offset, int sigma, double horizon,
                                    const SimOptions& opt);

class RobSimulator {
public:
    explicit RobSimulator(const geom::RobGeometry& g, SimOptions opt = {});

    // One event step, bounded by `horizon` (absolute time).
    Event advance(SystemState& s, double horizon);

    // Run to t_end, emitting a sample every sample_dt (0 disables sampling).
    RunStats run(SystemState& s, double t_end, double sample_dt,
                 const Recorder& rec = {});

    // Vertical energy: the horizontal component decouples and is excluded.
    double system_energy(const SystemState& s) const {
        return 0.5 * s.particle.m * s.particle.v * s.particle.v + s.bar.energy();
    }

    TraceSample sample(const SystemState& s) const;
    const geom::RobGeometry& geometry() const { return geom_; }

private:
    void guard(SystemState& s);

    geom::RobGeometry geom_;
    SimOptions opt_;
    double root_tol_;
    long stall_count_ = 0;
    long projections_ = 0;
};

class MushroomSimulator {
public:
    explicit MushroomSimulator(const geom::MushroomGeometry& g, SimOptions opt = {});

    Event advance(SystemState& s, double horizon);
    RunStats run(SystemState& s, double t_end, double sample_dt,
                 const Recorder& rec = {});

    double system_energy(const SystemState& s) const {
        const auto& p = s.particle;
        return 0.5 * p.m * (p.u * p.u + p.v * p.v) + s.bar.energy();
    }

    // Orbits in the cap conserve the caustic radius |x v_y - y v_x| / |v|;
    // those with radius >= w(y_b) never reach the throat.
    bool on_integrable_orbit(const SystemState& s) const;

    TraceSample sample(const SystemState& s) const;
    const geom::MushroomGeometry& geometry() const { return geom_; }

private:
    void guard(SystemState& s);

    geom::MushroomGeometry geom_;
    SimOptions opt_;
    double root_tol_;
    long stall_count_ = 0;
    long projections_ = 0;
};

} // namespace springy::dyn

#endif
