#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "dpbound/models.hpp"
#include "dpbound/quantities.hpp"

namespace dpbound {

/// Experimental upper limit on unexplained specific heating power.
struct SpecificPowerLimit {
    Quantity power; ///< W/kg
};

/// A length bound quoted directly by its source, already inverted under a
/// particular heating model.
struct DirectLengthBound {
    Quantity length; ///< m
    ModelKind model;
};

/// One named experimental constraint, with exactly one constraint variant.
struct ExperimentRecord {
    std::string name;
    std::variant<SpecificPowerLimit, DirectLengthBound> constraint;
    std::optional<std::string> material; ///< built-in material name
    std::string temperature_note;
    std::string provenance;

    bool is_power_limit() const {
        return std::holds_alternative<SpecificPowerLimit>(constraint);
    }
};

/// Provenance-tagged registry of experimental constraints. Immutable after
/// load. The built-in set mirrors the shipped data/catalog.json:
///
///   lisa-pathfinder    direct bound R0 > 8.2e-14 m (DP)
///   neutron-stars      specific-power limit 1.0e-7 W/kg
///   neptune            specific-power limit 2.0e-11 W/kg
///   cryostat-heatleak  specific-power limit 1.0e-11 W/kg (copper stage)
///
/// plus a non-numeric annotation recording the x-ray exclusion claim.
class Catalog {
public:
    static Catalog builtin();
    static Catalog load(const std::filesystem::path& path);
    static Catalog load(std::istream& in, const std::string& origin = "<stream>");
    /// Path from the DPBOUND_CATALOG environment variable when set,
    /// otherwise the built-in records.
    static Catalog from_environment();

    void save(const std::filesystem::path& path) const;
    void save(std::ostream& out) const;

    int version() const { return version_; }
    const std::vector<ExperimentRecord>& records() const { return records_; }
    const std::vector<std::string>& annotations() const {
        return annotations_;
    }
    const ExperimentRecord& find(std::string_view name) const;

    bool operator==(const Catalog& o) const;

private:
    int version_ = 1;
    std::vector<ExperimentRecord> records_;
    std::vector<std::string> annotations_;
};

/// Length bound implied by a record under the given model: power limits are
/// inverted through the heating law; direct bounds pass through unchanged
/// but only for their own model kind (ModelMismatchError otherwise).
LengthBound derive_bound(const ExperimentRecord& record,
                         const HeatingModel& model);

/// Bounds for every record, strongest exclusion (largest length) first;
/// ties broken lexicographically by name.
std::vector<std::pair<std::string, LengthBound>>
rank_bounds(const std::vector<ExperimentRecord>& records,
            const HeatingModel& model);

/// Sampled exclusion-plot data: the model's specific-power curve over a
/// length range, horizontal experimental limits and vertical length markers.
struct ExclusionDataset {
    ModelKind model;
    std::vector<std::pair<double, double>> model_curve; ///< (m, W/kg)
    struct LimitLine {
        std::string label;
        double power; ///< W/kg
    };
    struct MarkerLine {
        std::string label;
        double length; ///< m
    };
    std::vector<LimitLine> limit_lines;
    std::vector<MarkerLine> marker_lines;
    std::pair<double, double> length_range; ///< m

    /// Length at which the sampled curve crosses `power`, by log-log
    /// interpolation between bracketing samples. Empty when outside range.
    std::optional<double> crossing_length(double power) const;
};

/// Sample the model curve log-uniformly over length_range (n_points >= 2),
/// collect limit lines from the records' specific-power constraints and
/// marker lines from `markers`. Direct length bounds contribute no line.
ExclusionDataset exclusion_dataset(
    const HeatingModel& model, const std::vector<ExperimentRecord>& records,
    const std::vector<std::pair<std::string, Quantity>>& markers,
    std::pair<Quantity, Quantity> length_range, std::size_t n_points);

/// Delimited-text export: one '#'-headed section per curve, limit and
/// marker.
void write_dataset_csv(const ExclusionDataset& dataset, std::ostream& out);

/// Standalone SVG with log-log axes, decade ticks and labeled lines.
void write_dataset_svg(const ExclusionDataset& dataset, std::ostream& out);

} // namespace dpbound
