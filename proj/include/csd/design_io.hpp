#pragma once

#include "csd/design.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <string_view>

namespace csd {

/// {kind, strategy, known_variance, M1, M2, N, phi_s, phi_o} with the
/// matrices flattened row-major. Doubles are written in shortest round-trip
/// form, so reading back reproduces every bit.
nlohmann::ordered_json design_to_json(const MeasurementDesign& design);
MeasurementDesign design_from_json(const nlohmann::ordered_json& doc);

std::string dump_design(const MeasurementDesign& design, int indent = 2);
MeasurementDesign parse_design(std::string_view text);

}  // namespace csd
