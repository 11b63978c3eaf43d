#ifndef SPRINGY_CONFIG_HPP
#define SPRINGY_CONFIG_HPP

#include <string>

#include "springy/ensemble.hpp"

namespace springy::cfg {

struct OutputConfig {
    std::string dir = "out";
    bool emit_plots = false;
};

// A full run recipe: geometry parameters, ensemble parameters, output options.
// One file reproduces one experiment.
struct RunConfig {
    std::string geometry_kind = "rob"; // rob | stadium | mushroom
    ens::Geometry geometry = geom::RobGeometry{};
    ens::EnsembleSpec spec{};
    OutputConfig output{};
};

// Defaults for a geometry kind (table parameters at their published values).
RunConfig default_config(const std::string& geometry_kind);

// Parse a sectioned key=value file. Errors carry file:line and the field.
RunConfig load_config(const std::string& path);

// Apply one "section.key" override (the CLI flag path).
void apply_override(RunConfig& c, const std::string& key, const std::string& value);

// Cross-field validation, including the consistency of the configured
// pressure-equilibrium position with the root of the averaged force balance.
void validate(const RunConfig& c);

// Render back to the file format (17 significant digits).
std::string dump(const RunConfig& c);

} // namespace springy::cfg

#endif
