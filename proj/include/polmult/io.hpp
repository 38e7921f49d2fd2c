#pragma once

// File formats. Complex numbers are [re, im]; matrices are row-major with an
// explicit list of doubled m labels. Output is deterministic: no timestamps,
// doubles printed to round-trip precision.

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "polmult/directions.hpp"
#include "polmult/multipole.hpp"
#include "polmult/quasi.hpp"
#include "polmult/state.hpp"
#include "polmult/tomography.hpp"

namespace polmult::io {

using nlohmann::json;

/// Malformed or inconsistent input. Maps to CLI exit code 2.
class SchemaError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline constexpr const char* kSectorFormat = "polmult.sector/1";
inline constexpr const char* kMultipoleFormat = "polmult.multipoles/1";
inline constexpr const char* kDirectionsFormat = "polmult.directions/1";
inline constexpr const char* kReconstructionFormat = "polmult.reconstruction/1";
inline constexpr const char* kMeasuresFormat = "polmult.measures/1";

/// Shortest text that reads back to the same double.
std::string format_double(double v);

json complex_to_json(Complex z);
Complex complex_from_json(const json& j);

json sector_to_json(const PolarizationSector& sector);
PolarizationSector sector_from_json(const json& j);

StateSpec state_spec_from_json(const json& j);

/// A sector file, or a state description that is built on the fly.
PolarizationSector load_state(const json& j);

json multipoles_to_json(const MultipoleTable& table);
MultipoleTable multipoles_from_json(const json& j);

json directions_to_json(const std::vector<std::pair<int, DirectionSet>>& sets);
/// Reads {"sets": [{"order", "label", "directions": [{"theta", "phi"}]}]}.
std::map<int, DirectionSet> directions_from_json(const json& j);

json measures_to_json(const MeasureReport& report);
void write_measures_blocks_csv(std::ostream& os, const MeasureReport& report);
void write_measures_aggregate_csv(std::ostream& os, const MeasureReport& report);

json count_record_to_json(const CountRecord& rec);
CountRecord count_record_from_json(const json& j);
void write_counts_jsonl(std::ostream& os, const std::vector<CountRecord>& records);
std::vector<CountRecord> read_counts_jsonl(std::istream& is);

void write_moments_csv(std::ostream& os, const std::vector<MomentRecord>& moments);
std::vector<MomentRecord> read_moments_csv(std::istream& is);

json reconstruction_to_json(const Reconstruction& rec, const MultipoleTable* truth);

/// Side-by-side text table of true and reconstructed multipoles per block.
void write_comparison_table(std::ostream& os, const Reconstruction& rec, const MultipoleTable* truth);

/// "# <header json>" line followed by theta,phi,value rows.
void write_grid_csv(std::ostream& os, const json& header, const SphereGrid& grid, const std::vector<double>& values);

json parse_json(std::istream& is, const std::string& what);
json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace polmult::io
