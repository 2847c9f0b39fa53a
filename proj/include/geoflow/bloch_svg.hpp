#pragma once

#include <string>

#include "geoflow/trajectory_io.hpp"

namespace geoflow {

/// Static SVG of a qubit trajectory: three cross-sections of the Bloch ball
/// (x1x2, x1x3, x2x3 planes) with the unit circle (pure-state boundary in
/// the Pauli convention), the projected polyline, and start/end markers.
/// Byte-deterministic for identical input. Coordinates given in
/// `convention` are rescaled so the drawn unit circle is the state boundary.
/// Throws InvariantError unless the table has exactly 3 coordinate columns.
std::string render_bloch_svg(const TrajectoryTable& table,
                             BasisConvention convention);

void write_bloch_svg(const std::string& path, const TrajectoryTable& table,
                     BasisConvention convention);

}  // namespace geoflow
