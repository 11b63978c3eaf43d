#ifndef SPRINGY_TRACE_HPP
#define SPRINGY_TRACE_HPP

#include <functional>

#include "springy/geometry.hpp"

namespace springy {

// One sampled point of a trajectory or reduced-model realization.
// e_p is the particle energy entering the energy budget: vertical-only for
// the rectangle table (horizontal motion decouples), full kinetic energy
// otherwise.
struct TraceSample {
    double t = 0.0;
    double y_b = 0.0;
    double v_b = 0.0;
    double e_b = 0.0;
    double e_p = 0.0;
    geom::Region region = geom::Region::FreeSpan;
};

using Recorder = std::function<void(const TraceSample&)>;

} // namespace springy

#endif
