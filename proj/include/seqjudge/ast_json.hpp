#pragma once

#include <nlohmann/json.hpp>

#include "seqjudge/diagram.hpp"

namespace seqjudge {

/// JSON dump of a parsed diagram, as printed by `seqjudge parse`. One-way;
/// the PlantUML text is the interchange format.
nlohmann::json diagram_to_json(const SequenceDiagram& d);

}  // namespace seqjudge
