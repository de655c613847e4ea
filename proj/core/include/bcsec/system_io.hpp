#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "bcsec/rate_algebra.hpp"

namespace bcsec {

/// System file. Either a bare list of constraints
///   [{"label", "relation", "rates": [{"var","num","den"}],
///     "infos": [{"A","B","C","num","den"}], "constant": {"num","den"}, "gate"}, ...]
/// (free vars R1,R2; every other rate is bound) or an object
///   {"name", "free", "bound", "collapse", "constraints": [...], "basis": [...]}.
/// Numerators and denominators may be integers or decimal strings.
ConstraintSystem system_from_json(const nlohmann::json& doc);
nlohmann::json system_to_json(const ConstraintSystem& system);
nlohmann::json constraint_to_json(const Constraint& c);

/// Resolves a preset name, "FM(NAME)" (NAME a preset or file) or a JSON file path.
ConstraintSystem resolve_system(const std::string& name, FmOptions options = {});

}  // namespace bcsec
