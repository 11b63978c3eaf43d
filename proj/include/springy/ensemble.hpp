#ifndef SPRINGY_ENSEMBLE_HPP
#define SPRINGY_ENSEMBLE_HPP

#include <cstdint>
#include <variant>
#include <vector>

#include "springy/dynamics.hpp"
#include "springy/geometry.hpp"
#include "springy/reduced.hpp"
#include "springy/rng.hpp"
#include "springy/trace.hpp"

namespace springy::ens {

enum class ModelKind { Billiard, Reduced };

using Geometry = std::variant<geom::RobGeometry, geom::MushroomGeometry>;

double total_energy(const Geometry& g);
double bar_spring_constant(const Geometry& g);
double bar_period(const Geometry& g);
bool is_rob(const Geometry& g);

struct EnsembleSpec {
    ModelKind model = ModelKind::Billiard;
    int n_particles = 1000;
    double m = 1e-3;       // particle/bar mass ratio (billiard only)
    double eb0 = 0.9;      // initial bar energy as a fraction of E
    double t_end = 60.0;
    double sample_dt = 0.02;
    std::uint64_t seed = 1;
    int runs = 1;
    int workers = 0;       // 0: hardware concurrency
    int failure_budget = 0;

    void validate(const Geometry& g) const; // throws ConfigError
};

// Number of grid samples a run emits (t = 0, dt, 2 dt, ... <= t_end).
long sample_count(double t_end, double sample_dt);

// One run's ensemble-averaged series on the sample grid.
struct Series {
    std::vector<double> t;
    std::vector<double> delta_ke; // <M v_b^2/2> - <per-DOF particle KE>
    std::vector<double> mean_eb;
    std::vector<double> mean_ep;
    std::vector<double> se;       // standard error of delta_ke across members
    int n_members = 0;
};

struct RateFit {
    double rate = 0.0;
    double t_efold = 0.0;  // end of the fit window
    double residual = 0.0; // rms of the log-linear fit
    bool no_decay = false;
    std::vector<double> smooth_abs;
};

struct Extrapolation {
    double intercept = 0.0;
    double slope = 0.0;
    double intercept_std = 0.0;
};

// Initial conditions: uniform bar phase at energy eb0*E; particle uniform
// over the chaotic component at the initial bar position with the direction
// convention of the table (fixed |u| and random sign for the rectangle,
// uniform direction otherwise).
dyn::SystemState initial_billiard_state(const Geometry& g, const EnsembleSpec& spec,
                                        Rng& rng);
reduced::ReducedState initial_reduced_state(const Geometry& g,
                                            const EnsembleSpec& spec, Rng& rng);

// One ensemble run (deterministic for fixed seed/run regardless of workers).
Series run_ensemble(const Geometry& g, const EnsembleSpec& spec, int run_index);

// Single trajectory / realization, full sample trace.
std::vector<TraceSample> run_trace(const Geometry& g, const EnsembleSpec& spec,
                                   int member = 0, int run_index = 0);

// Rate of the exponential decay of |delta KE|: moving-average smoothing over
// one bar period, fit window [0,T] with T the first e-fold of the smoothed
// series, least-squares slope of -log |smoothed|.
RateFit fit_rate(const Series& s, double bar_period);

// Weighted least squares of rate against sqrt(m); intercept extrapolates to
// the infinitely heavy bar.
Extrapolation sqrt_m_extrapolation(const std::vector<double>& m,
                                   const std::vector<double>& rate,
                                   const std::vector<double>& rate_std);

// Piecewise adiabatic invariant along a trace: bar energy on free/captured
// segments, sqrt(E_p) * chamber length in the rectangle chambers,
// E_p * G(y_b) on chaotic segments of the mushroom.
std::vector<double> invariant_series(const Geometry& g,
                                     const std::vector<TraceSample>& trace);

struct JSegment {
    std::size_t begin = 0, end = 0; // [begin, end)
    geom::Region tag = geom::Region::FreeSpan;
    double j_head = 0.0, j_tail = 0.0, j_mean = 0.0;
    double drift_rel = 0.0;
};

std::vector<JSegment> invariant_segments(const Geometry& g,
                                         const std::vector<TraceSample>& trace,
                                         const std::vector<double>& j);

// Time for the smoothed delta-KE to fall to half its initial value.
struct TransientResult {
    double t_half = 0.0;
    bool crossed = false;
};
TransientResult transient_time(const Series& s, double bar_period);

} // namespace springy::ens

#endif
