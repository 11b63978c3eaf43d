#ifndef SPRINGY_GEOMETRY_HPP
#define SPRINGY_GEOMETRY_HPP

#include <string>

#include "springy/common.hpp"

namespace springy::geom {

enum class Side { Up, Down };

// Region / branch tag shared by billiard traces and reduced-model traces.
enum class Region {
    FreeSpan,   // rectangle, outside the bar span
    ChamberUp,  // rectangle, above the bar
    ChamberDown,// rectangle, below the bar
    Cap,        // half-disc, particle on a chaotic orbit
    Stem,       // trapezoidal stem
    Captured,   // half-disc, particle on an integrable orbit (or reduced-model cap branch)
    Chaotic     // reduced-model chaotic branch
};

const char* region_name(Region r);

// Rectangle partially split by a horizontal spring-mounted bar attached to
// the left wall. The rectangle is [0,L] x [-h/2,h/2]; the bar spans
// x in [0,lambda] at height y_b.
struct RobGeometry {
    double L = 2.0;       // horizontal length
    double h = 2.0;       // total height
    double lambda = 1.0;  // bar length
    double k = 81.0;      // spring constant
    double M = 1.0;       // bar mass
    double E = 1.0;       // conserved vertical energy (particle vertical + bar)
    double u_p = 8.049844718999243; // particle horizontal speed, 18/sqrt(5)

    double tau() const { return lambda / L; }
    double omega() const { return std::sqrt(k / M); }
    double bar_period() const { return 2.0 * kPi / omega(); }
    double period() const { return 2.0 * L / u_p; } // horizontal bounce period T_p
    double max_bar_amplitude() const { return std::sqrt(2.0 * E / k); }

    void validate() const; // throws ConfigError naming the offending field
};

// Synchronisation law between the throat half-width w and the bar position.
// w attains its minimum w_min at the pressure-equilibrium position y_f and
// grows quadratically on each side until clamped at w_max.
struct ThroatProtocol {
    double y_f = -0.2436;
    double w_min = 0.7;
    double c_below = 0.6;
    double c_above = 6.0;
    double w_max = 1.0;
};

// Half-disc cap of radius h sitting on y=0, over a symmetric trapezoidal
// stem whose side walls slant inward by angle theta and whose floor is the
// bar at y = y_b - ell0. With stadium_mode the throat spans the full cap
// diameter (w == h) and the table is a slanted half-stadium.
struct MushroomGeometry {
    double h = 1.0;         // cap radius
    double ell0 = 2.0;      // stem length at y_b = 0
    double tan_theta = 0.17;
    double k = 1.0;
    double M = 1.0;
    double E = 1.0;
    ThroatProtocol throat{};
    bool stadium_mode = false;

    double ell(double y_b) const { return ell0 - y_b; }
    double bar_face(double y_b) const { return y_b - ell0; }
    double omega() const { return std::sqrt(k / M); }
    double bar_period() const { return 2.0 * kPi / omega(); }
    double max_bar_amplitude() const { return std::sqrt(2.0 * E / k); }
    // stem half-width at height y (y in [bar_face, 0])
    double stem_half_width(double y) const { return h + y * tan_theta; }

    void validate() const;
};

// Throat half-width at bar position y_b. Total function; stadium_mode pins
// the throat fully open.
double w_of_yb(const MushroomGeometry& g, double y_b);
// dw/dy_b (zero on the clamped plateau; the kink at the clamp boundary is
// resolved toward the plateau).
double w_of_yb_deriv(const MushroomGeometry& g, double y_b);

// Phase-space volume of the whole table at unit particle energy:
// V = pi^2 h^2 + 2 pi (2 h ell - ell^2 tan(theta)) = 2 pi * area.
double v_total(const MushroomGeometry& g, double y_b);
double v_total_deriv(const MushroomGeometry& g, double y_b);

// Phase-space volume of the integrable cap component for throat half-width w.
double v_ell(const MushroomGeometry& g, double w);
double v_ell_deriv_w(const MushroomGeometry& g, double w);

// Chaotic-component volume V_c = V - V_ell(w(y_b)) and its y_b derivative.
double v_chaotic(const MushroomGeometry& g, double y_b);
double v_chaotic_deriv(const MushroomGeometry& g, double y_b);

// Length of the rectangle chamber above/below the bar: h/2 -/+ y_b.
double rob_chamber_length(const RobGeometry& g, double y_b, Side side);

// Billiard area at bar position y_b (used by sampling and by volume checks).
double mushroom_area(const MushroomGeometry& g, double y_b);

// Point-in-domain tests, with `tol` the admissible boundary penetration.
bool rob_contains(const RobGeometry& g, double x, double y, double tol);
bool mushroom_contains(const MushroomGeometry& g, double y_b, double x, double y,
                       double tol);

// Region of a particle position at bar position y_b. Points on the bar line
// or on the throat line are assigned by the vertical velocity sign `v`.
Region classify_region(const RobGeometry& g, double x, double y, double y_b,
                       double v, double tol = 1e-9);
Region classify_region(const MushroomGeometry& g, double x, double y, double y_b,
                       double v, double tol = 1e-9);

} // namespace springy::geom

#endif
