#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "cltlab/bounds.hpp"
#include "cltlab/lattice.hpp"
#include "cltlab/montecarlo.hpp"
#include "cltlab/summation.hpp"

namespace cltlab {

using Json = nlohmann::json;

/// Reads {"a": {...}, "gamma": {...}}, either at top level or under an
/// "instance" key. Throws InvalidInstance (or the lattice errors) on bad input.
Instance parse_instance(const Json& doc);
Instance load_instance(const std::filesystem::path& path);
Json instance_to_json(const Instance& inst);

/// Every floating-point number is written with 17 significant digits, so it
/// parses back to the same double.
std::string format_double(double v);
std::string dump_json(const Json& doc, int indent = 2);

/// FNV-1a 64 of the canonical instance JSON, as "fnv1a64:<16 hex digits>".
std::string fnv1a64_hex(std::string_view bytes);
std::string instance_hash(const Instance& inst);

Json weights_to_json(const WeightArray& b);
std::string weights_to_csv(const WeightArray& b);
Json bound_report_to_json(const BoundReport& r, bool include_probes);
Json simulation_report_to_json(const SimulationReport& r);
std::string simulation_report_to_csv(const SimulationReport& r);
Json certificate_to_json(const Certificate& c, const ExactConstants* exact,
                         const std::vector<std::string>& members);
Json sweep_to_json(const SweepResult& s);
/// Columns kappa, rho, ks_empirical, ks_upper, n_samples, seed.
std::string sweep_to_csv(const SweepResult& s);

/// Log-log SVG of ks_empirical and ks_upper against kappa.
std::string sweep_to_svg(const SweepResult& s);

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace cltlab
