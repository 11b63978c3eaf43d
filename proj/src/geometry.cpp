#include "springy/geometry.hpp"

#include <cmath>
#include <sstream>

namespace springy::geom {

const char* region_name(Region r) {
    switch (r) {
        case Region::FreeSpan: return "free";
        case Region::ChamberUp: return "up";
        case Region::ChamberDown: return "down";
        case Region::Cap: return "cap";
        case Region::Stem: return "stem";
        case Region::Captured: return "captured";
        case Region::Chaotic: return "chaotic";
    }
    return "?";
}

namespace {
[[noreturn]] void fail(const std::string& field, const std::string& msg) {
    throw ConfigError(field + ": " + msg);
}
} // namespace

void RobGeometry::validate() const {
    if (!(L > 0.0)) fail("geometry.L", "must be > 0");
    if (!(h > 0.0)) fail("geometry.h", "must be > 0");
    if (!(lambda > 0.0 && lambda < L))
        fail("geometry.lambda", "must satisfy 0 < lambda < L");
    if (!(k > 0.0)) fail("geometry.k", "must be > 0");
    if (!(M > 0.0)) fail("geometry.M", "must be > 0");
    if (!(E > 0.0)) fail("geometry.E", "must be > 0");
    if (!(u_p > 0.0)) fail("geometry.u_p", "must be > 0");
    if (!(max_bar_amplitude() < 0.5 * h))
        fail("geometry.k", "bar amplitude sqrt(2E/k) must stay below h/2");
}

void MushroomGeometry::validate() const {
    if (!(h > 0.0)) fail("geometry.h", "must be > 0");
    if (!(k > 0.0)) fail("geometry.k", "must be > 0");
    if (!(M > 0.0)) fail("geometry.M", "must be > 0");
    if (!(E > 0.0)) fail("geometry.E", "must be > 0");
    if (!(tan_theta >= 0.0)) fail("geometry.tan_theta", "must be >= 0");
    const double amp = max_bar_amplitude();
    if (!(ell0 - amp > 0.0))
        fail("geometry.ell0", "stem length ell0 - y_b must stay positive for all "
                              "reachable bar positions (need ell0 > sqrt(2E/k))");
    const double ell_max = ell0 + amp;
    if (!(h - ell_max * tan_theta > 0.0))
        fail("geometry.tan_theta", "stem bottom half-width h - ell*tan(theta) must "
                                   "stay positive for all reachable bar positions");
    if (!stadium_mode) {
        if (!(throat.w_min > 0.0 && throat.w_min <= throat.w_max))
            fail("geometry.throat.w_min", "must satisfy 0 < w_min <= w_max");
        if (!(throat.w_max <= h)) fail("geometry.throat.w_max", "must be <= h");
        if (!(throat.c_below >= 0.0)) fail("geometry.throat.c_below", "must be >= 0");
        if (!(throat.c_above >= 0.0)) fail("geometry.throat.c_above", "must be >= 0");
        if (!(std::abs(throat.y_f) < amp))
            fail("geometry.throat.y_f", "must lie inside the reachable bar range");
    }
}

double w_of_yb(const MushroomGeometry& g, double y_b) {
    if (g.stadium_mode) return g.h;
    const double d = y_b - g.throat.y_f;
    const double c = (d < 0.0) ? g.throat.c_below : g.throat.c_above;
    return std::min(g.throat.w_max, g.throat.w_min + c * d * d);
}

double w_of_yb_deriv(const MushroomGeometry& g, double y_b) {
    if (g.stadium_mode) return 0.0;
    const double d = y_b - g.throat.y_f;
    const double c = (d < 0.0) ? g.throat.c_below : g.throat.c_above;
    if (g.throat.w_min + c * d * d >= g.throat.w_max) return 0.0;
    return 2.0 * c * d;
}

double v_total(const MushroomGeometry& g, double y_b) {
    const double ell = g.ell(y_b);
    if (!(ell > 0.0)) throw SimulationError("degenerate stem: ell(y_b) <= 0");
    return kPi * kPi * g.h * g.h + 2.0 * kPi * (2.0 * g.h * ell - ell * ell * g.tan_theta);
}

double v_total_deriv(const MushroomGeometry& g, double y_b) {
    const double ell = g.ell(y_b);
    return -2.0 * kPi * (2.0 * g.h - 2.0 * ell * g.tan_theta);
}

double v_ell(const MushroomGeometry& g, double w) {
    if (w < 0.0 || w > g.h) throw SimulationError("v_ell: w outside [0,h]");
    const double s = w / g.h;
    return 2.0 * kPi * g.h * g.h * (std::acos(s) - s * std::sqrt(1.0 - s * s));
}

double v_ell_deriv_w(const MushroomGeometry& g, double w) {
    const double s = w / g.h;
    return -4.0 * kPi * g.h * std::sqrt(std::max(0.0, 1.0 - s * s));
}

double v_chaotic(const MushroomGeometry& g, double y_b) {
    if (g.stadium_mode) return v_total(g, y_b);
    const double vc = v_total(g, y_b) - v_ell(g, w_of_yb(g, y_b));
    if (!(vc > 0.0)) throw SimulationError("v_chaotic: non-positive chaotic volume");
    return vc;
}

double v_chaotic_deriv(const MushroomGeometry& g, double y_b) {
    if (g.stadium_mode) return v_total_deriv(g, y_b);
    return v_total_deriv(g, y_b) -
           v_ell_deriv_w(g, w_of_yb(g, y_b)) * w_of_yb_deriv(g, y_b);
}

double rob_chamber_length(const RobGeometry& g, double y_b, Side side) {
    return side == Side::Up ? 0.5 * g.h - y_b : 0.5 * g.h + y_b;
}

double mushroom_area(const MushroomGeometry& g, double y_b) {
    const double ell = g.ell(y_b);
    // half-disc cap + trapezoidal stem
    return 0.5 * kPi * g.h * g.h + ell * (2.0 * g.h - ell * g.tan_theta);
}

bool rob_contains(const RobGeometry& g, double x, double y, double tol) {
    return x >= -tol && x <= g.L + tol && std::abs(y) <= 0.5 * g.h + tol;
}

bool mushroom_contains(const MushroomGeometry& g, double y_b, double x, double y,
                       double tol) {
    if (y >= 0.0) {
        return x * x + y * y <= sqr(g.h + tol);
    }
    if (y < g.bar_face(y_b) - tol) return false;
    return std::abs(x) <= g.stem_half_width(y) + tol;
}

Region classify_region(const RobGeometry& g, double x, double y, double y_b,
                       double v, double tol) {
    if (!rob_contains(g, x, y, tol))
        throw SimulationError("classify_region: point outside rectangle");
    if (x > g.lambda) return Region::FreeSpan;
    if (y > y_b) return Region::ChamberUp;
    if (y < y_b) return Region::ChamberDown;
    return v >= 0.0 ? Region::ChamberUp : Region::ChamberDown;
}

Region classify_region(const MushroomGeometry& g, double x, double y, double y_b,
                       double v, double tol) {
    if (!mushroom_contains(g, y_b, x, y, tol))
        throw SimulationError("classify_region: point outside table");
    if (y > 0.0) return Region::Cap;
    if (y < 0.0) return Region::Stem;
    // on the throat line: resolve by vertical velocity sign
    return v >= 0.0 ? Region::Cap : Region::Stem;
}

} // namespace springy::geom
