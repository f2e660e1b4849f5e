#ifndef OPSCALE_IO_H
#define OPSCALE_IO_H

#include <filesystem>
#include <string>

#include <json.hpp>

#include "opscale/cpmap.h"
#include "opscale/diagnostics.h"
#include "opscale/solvers.h"

namespace opscale {

class IoError : public Error {
 public:
  using Error::Error;
};

// Instance file: {"m", "n", "k", "matrices": [k x m x n row-major], "label"}.
nlohmann::json instance_to_json(const KrausCollection& a);
// Throws IoError on malformed input, AssumptionViolated on a singular Gram sum.
KrausCollection instance_from_json(const nlohmann::json& j);

void write_instance(const KrausCollection& a, const std::filesystem::path& path);
KrausCollection read_instance(const std::filesystem::path& path);

// "t,err,omega,wall_nanos" with %.17g reals.
std::string trace_to_csv(const IterationTrace& trace);
nlohmann::json config_to_json(const SolverConfig& cfg);
nlohmann::json trace_to_json(const IterationTrace& trace, const SolverConfig& cfg);

// {"check", "samples", "worst_slack", "pass"}.
nlohmann::json report_to_json(const std::string& check, const GConvexityReport& r);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace opscale

#endif  // OPSCALE_IO_H
