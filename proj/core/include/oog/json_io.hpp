#pragma once

#include <string>

#include "oog/plangen.hpp"
#include "oog/recording.hpp"

namespace oog {

/// Formats a double with 17 significant digits ("%.17g"): every value
/// round-trips bit-exactly and serialization is byte-stable across runs.
std::string format_double(double value);

// Plan files carry the OOG sequence plus the generation diagnostics
// (velocity series, raw changepoints, merge log, warnings); the schema is
// documented in the README.

std::string serialize_plan(const ManipulationPlan& plan,
                           const PlanDiagnostics& diagnostics);

struct LoadedPlan {
  ManipulationPlan plan;
  PlanDiagnostics diagnostics;
};

LoadedPlan load_plan(const std::string& text);

LoadedPlan load_plan_file(const std::string& path);
void save_plan_file(const ManipulationPlan& plan,
                    const PlanDiagnostics& diagnostics,
                    const std::string& path);

}  // namespace oog
