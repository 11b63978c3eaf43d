#ifndef SPRINGY_REDUCED_HPP
#define SPRINGY_REDUCED_HPP

#include <array>
#include <memory>
#include <vector>

#include "springy/geometry.hpp"
#include "springy/rng.hpp"
#include "springy/trace.hpp"

namespace springy::reduced {

// ---------------------------------------------------------------------------
// Averaged laws
// ---------------------------------------------------------------------------

// Bar acceleration under the ergodic averaged force:
//   -k y + (2/d) (E - E_b) V_c'(y)/V_c(y).
double ergodic_rhs(double y_b, double v_b, const geom::MushroomGeometry& g,
                   double E, int d);

// Effective potential for bar motion at invariant level J:
//   U_eff = k y^2 / 2 + (J / V_c(y))^{2/d}.
double u_effective(const geom::MushroomGeometry& g, double y_b, double J, int d);
// Rectangle chamber variant (one-dimensional fast motion).
double u_effective(const geom::RobGeometry& g, double y_b, double J, geom::Side side);

// Bar acceleration inside a rectangle chamber at invariant level J.
double rob_branch_acceleration(const geom::RobGeometry& g, double y_b, double J,
                               geom::Side side);

// Pressure-equilibrium bar position: root of
//   k y = (V'(y)/V_c(y)) (E - k y^2 / 2)
// on the reachable range, to 1e-8.
double pressure_equilibrium(const geom::MushroomGeometry& g, double E);

// Volume-ratio correction of the leaky invariant, ln G(y) = int_0^y V'/V_c.
// Direct adaptive quadrature to 1e-10 absolute.
double ln_g_direct(const geom::MushroomGeometry& g, double y_b);
double g_factor(const geom::MushroomGeometry& g, double y_b);

// Instantaneous stem->cap transfer rate; zero unless the throat is narrowing.
double capture_hazard(const geom::MushroomGeometry& g, double y_b, double v_b);

// Largest invariant level, attained at the pressure equilibrium:
//   J_f = (E - U(y_f))^{d/2} V_c(y_f).
double j_ceiling(const geom::MushroomGeometry& g, double E, int d);

// Cached ln G on a uniform-by-section grid (protocol kinks are section
// boundaries, so every cell interpolates a smooth integrand). Cubic Hermite
// cells use the exact integrand V'/V_c as endpoint slope.
class GTable {
public:
    explicit GTable(const geom::MushroomGeometry& g, int cells = 2048);

    double ln_g(double y_b) const;
    double g(double y_b) const { return std::exp(ln_g(y_b)); }
    double y_min() const { return lo_; }
    double y_max() const { return hi_; }

private:
    struct Section {
        double y0, dy;
        int first; // index of the first node of this section
        int cells;
    };
    double lo_, hi_;
    std::vector<Section> sections_;
    std::vector<double> node_y_, node_val_, node_slope_;
};

// ---------------------------------------------------------------------------
// Stochastic reduced models
// ---------------------------------------------------------------------------

struct ReducedState {
    double y_b = 0.0;
    double v_b = 0.0;
    double t = 0.0;
    geom::Region branch = geom::Region::Chaotic;
    double J = 0.0;         // invariant level of the active branch
    double w_c = 0.0;       // throat width recorded at capture
    double t_release = 0.0; // scheduled release time while captured
    double hazard_accum = 0.0;
    double hazard_threshold = -1.0; // < 0 means not yet drawn

    double bar_energy(double k, double M = 1.0) const {
        return 0.5 * (M * v_b * v_b + k * y_b * y_b);
    }
};

// Sampling grid shared by the model drivers.
struct SampleGrid {
    double t0 = 0.0;
    double dt = 0.0;
    long n = 0; // next index to emit
    const Recorder* rec = nullptr;

    bool active() const { return rec != nullptr && dt > 0.0; }
    double next() const { return t0 + static_cast<double>(n) * dt; }
};

// Hybrid system for the rectangle: each horizontal period opens with a
// chamber interval (averaged one-sided bar forcing at a freshly drawn side
// and invariant level) and closes with free harmonic flight.
class RobReducedModel {
public:
    explicit RobReducedModel(const geom::RobGeometry& g);
    ~RobReducedModel();
    RobReducedModel(RobReducedModel&&) noexcept;
    RobReducedModel& operator=(RobReducedModel&&) noexcept;

    // Advance exactly one period T_p (entry time must be a multiple of T_p).
    void step(ReducedState& s, Rng& rng);

    // Advance to t_end, emitting samples every sample_dt.
    void run(ReducedState& s, Rng& rng, double t_end, double sample_dt,
             const Recorder& rec = {});

    // Single-branch averaged flow (no redraws); exposed for invariant checks.
    void integrate_branch(double& y_b, double& v_b, geom::Side side, double J,
                          double duration);

    const geom::RobGeometry& geometry() const { return geom_; }

private:
    void advance_period(ReducedState& s, Rng& rng, double t_cap, SampleGrid* grid);
    void flow_chamber(ReducedState& s, geom::Side side, double t1, SampleGrid* grid);
    void flow_free(ReducedState& s, double t1, SampleGrid* grid);

    geom::RobGeometry geom_;
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Piecewise-deterministic process for the mushroom: averaged leaky-law
// forcing while the particle shares energy with the bar, exponential capture
// clock driven by the integrated hazard, free harmonic flight while captured,
// release when the throat reopens to the capture width.
class MushroomReducedModel {
public:
    explicit MushroomReducedModel(const geom::MushroomGeometry& g);
    ~MushroomReducedModel();
    MushroomReducedModel(MushroomReducedModel&&) noexcept;
    MushroomReducedModel& operator=(MushroomReducedModel&&) noexcept;

    // Advance by dt_max; captures and releases are processed internally.
    void step(ReducedState& s, Rng& rng, double dt_max);

    void run(ReducedState& s, Rng& rng, double t_end, double sample_dt,
             const Recorder& rec = {});

    // First release delay for a captured state (root of w(y_b(t)) = w_c with
    // the throat widening), measured from s.t.
    double release_delay(const ReducedState& s) const;

    const geom::MushroomGeometry& geometry() const { return geom_; }
    const GTable& gtable() const { return *gtable_; }

    // Optional capture/release event log for distribution and release-rule
    // checks.
    struct JumpEvent {
        double t;
        double y_b;
        double v_b;
        double w_c;
        bool capture; // false: release
    };
    void set_event_logging(bool on) { log_events_ = on; }
    const std::vector<JumpEvent>& jump_log() const { return jump_log_; }
    void clear_jump_log() { jump_log_.clear(); }

private:
    void advance_until(ReducedState& s, Rng& rng, double t_cap, SampleGrid* grid);
    void flow_chaotic(ReducedState& s, Rng& rng, double t1, SampleGrid* grid);
    void flow_captured(ReducedState& s, double t1, SampleGrid* grid);

    geom::MushroomGeometry geom_;
    std::unique_ptr<GTable> gtable_;
    std::vector<JumpEvent> jump_log_;
    bool log_events_ = false;

    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace springy::reduced

#endif
