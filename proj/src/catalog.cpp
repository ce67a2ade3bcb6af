#include "dpbound/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace dpbound {

namespace {

using nlohmann::ordered_json;

ordered_json record_to_json(const ExperimentRecord& r) {
    ordered_json j;
    j["name"] = r.name;
    if (const auto* pl = std::get_if<SpecificPowerLimit>(&r.constraint)) {
        j["type"] = "specific-power-limit";
        j["power_w_per_kg"] = pl->power.value();
    } else {
        const auto& db = std::get<DirectLengthBound>(r.constraint);
        j["type"] = "direct-length-bound";
        j["length_m"] = db.length.value();
        j["model"] = std::string(to_string(db.model));
    }
    if (r.material) j["material"] = *r.material;
    j["temperature_note"] = r.temperature_note;
    j["provenance"] = r.provenance;
    return j;
}

ExperimentRecord record_from_json(const ordered_json& j) {
    ExperimentRecord r;
    r.name = j.at("name").get<std::string>();
    std::string type = j.at("type").get<std::string>();
    if (type == "specific-power-limit") {
        double p = j.at("power_w_per_kg").get<double>();
        if (!(p > 0))
            throw ParseError("record '" + r.name +
                             "': power limit must be positive");
        r.constraint =
            SpecificPowerLimit{Quantity{p, Dimension::specific_power()}};
    } else if (type == "direct-length-bound") {
        double l = j.at("length_m").get<double>();
        if (!(l > 0))
            throw ParseError("record '" + r.name +
                             "': length bound must be positive");
        auto kind = model_kind_from_string(j.at("model").get<std::string>());
        if (!kind)
            throw ParseError("record '" + r.name + "': unknown model kind");
        r.constraint = DirectLengthBound{
            Quantity{l, Dimension::length()}, *kind};
    } else {
        throw ParseError("record '" + r.name + "': unknown constraint type '" +
                         type + "'");
    }
    if (j.contains("material"))
        r.material = j.at("material").get<std::string>();
    if (j.contains("temperature_note"))
        r.temperature_note = j.at("temperature_note").get<std::string>();
    if (j.contains("provenance"))
        r.provenance = j.at("provenance").get<std::string>();
    return r;
}

bool record_equal(const ExperimentRecord& a, const ExperimentRecord& b) {
    if (a.name != b.name || a.material != b.material ||
        a.temperature_note != b.temperature_note ||
        a.provenance != b.provenance)
        return false;
    if (a.constraint.index() != b.constraint.index()) return false;
    if (const auto* pa = std::get_if<SpecificPowerLimit>(&a.constraint)) {
        const auto& pb = std::get<SpecificPowerLimit>(b.constraint);
        return pa->power.value() == pb.power.value();
    }
    const auto& da = std::get<DirectLengthBound>(a.constraint);
    const auto& db = std::get<DirectLengthBound>(b.constraint);
    return da.length.value() == db.length.value() && da.model == db.model;
}

} // namespace

Catalog Catalog::builtin() {
    Catalog c;
    c.version_ = 1;
    c.records_ = {
        ExperimentRecord{
            "lisa-pathfinder",
            DirectLengthBound{Quantity{8.2e-14, Dimension::length()},
                              ModelKind::DP},
            std::nullopt,
            "room-temperature test masses; force-noise, not heating",
            "LISA Pathfinder differential-acceleration noise, improved "
            "second-run analysis; reported bound R0 > 8.2e-14 m"},
        ExperimentRecord{
            "neutron-stars",
            SpecificPowerLimit{
                Quantity{1.0e-7, Dimension::specific_power()}},
            std::nullopt,
            "equilibrium surface temperature of the coldest observable "
            "neutron stars",
            "neutron-star cooling balance (Tilloy & Stacey), "
            "P ~ 100 nW/kg; implies R0 > ~1e-13 m"},
        ExperimentRecord{
            "neptune",
            SpecificPowerLimit{
                Quantity{2.0e-11, Dimension::specific_power()}},
            std::nullopt,
            "blackbody emission at equilibrium; central temperature ~5e3 K, "
            "so the nuclear spread is thermal rather than zero-point",
            "Neptune radiated-power budget (outer-planet heating "
            "limits), P ~ 20 pW/kg; implies R0 > ~3.7e-12 m"},
        ExperimentRecord{
            "cryostat-heatleak",
            SpecificPowerLimit{
                Quantity{1.0e-11, Dimension::specific_power()}},
            "copper",
            "nuclear demagnetization stage below 1 mK; nuclear spread "
            "dominated by zero-point motion",
            "residual time-independent heat leak, Gloos et al. "
            "demagnetization cryostat (17 kg copper stage), adopted "
            "10 pW/kg; implies R0 > ~4.6e-12 m, a > ~0.9e-11 m"},
    };
    c.annotations_ = {
        "x-ray spontaneous emission in ultrapure Ge (Donadi et al.) claims "
        "exclusion of the parameter-free DP model assuming a white noise "
        "spectrum up to 1e18 Hz; a high-frequency cutoff below that evades "
        "it, so no numeric length bound is recorded here"};
    return c;
}

Catalog Catalog::load(std::istream& in, const std::string& origin) {
    ordered_json j;
    try {
        j = ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("catalog " + origin + ": " + e.what());
    }
    Catalog c;
    try {
        c.version_ = j.at("version").get<int>();
        for (const auto& rj : j.at("records"))
            c.records_.push_back(record_from_json(rj));
        if (j.contains("annotations"))
            for (const auto& a : j.at("annotations"))
                c.annotations_.push_back(a.get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("catalog " + origin + ": " + e.what());
    }
    return c;
}

Catalog Catalog::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open catalog file '" + path.string() + "'");
    return load(in, "'" + path.string() + "'");
}

Catalog Catalog::from_environment() {
    if (const char* path = std::getenv("DPBOUND_CATALOG"))
        return load(std::filesystem::path(path));
    return builtin();
}

void Catalog::save(std::ostream& out) const {
    ordered_json j;
    j["version"] = version_;
    j["records"] = ordered_json::array();
    for (const auto& r : records_) j["records"].push_back(record_to_json(r));
    j["annotations"] = annotations_;
    out << j.dump(2) << "\n";
}

void Catalog::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out)
        throw InputError("cannot write catalog file '" + path.string() + "'");
    save(out);
}

const ExperimentRecord& Catalog::find(std::string_view name) const {
    for (const auto& r : records_)
        if (r.name == name) return r;
    throw InputError("no catalog record named '" + std::string(name) + "'");
}

bool Catalog::operator==(const Catalog& o) const {
    if (version_ != o.version_ || annotations_ != o.annotations_ ||
        records_.size() != o.records_.size())
        return false;
    for (std::size_t i = 0; i < records_.size(); ++i)
        if (!record_equal(records_[i], o.records_[i])) return false;
    return true;
}

LengthBound derive_bound(const ExperimentRecord& record,
                         const HeatingModel& model) {
    if (const auto* pl = std::get_if<SpecificPowerLimit>(&record.constraint))
        return invert_bound(model, pl->power, record.provenance);
    const auto& direct = std::get<DirectLengthBound>(record.constraint);
    if (direct.model != model.kind())
        throw ModelMismatchError(
            "record '" + record.name + "' is a direct bound for model '" +
            std::string(to_string(direct.model)) +
            "', cannot be read as a bound for '" +
            std::string(to_string(model.kind())) + "'");
    return {direct.length, direct.model, record.provenance};
}

std::vector<std::pair<std::string, LengthBound>>
rank_bounds(const std::vector<ExperimentRecord>& records,
            const HeatingModel& model) {
    if (records.empty()) throw InputError("cannot rank an empty record list");
    std::vector<std::pair<std::string, LengthBound>> out;
    out.reserve(records.size());
    for (const auto& r : records)
        out.emplace_back(r.name, derive_bound(r, model));
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.second.length.value() != b.second.length.value())
            return a.second.length.value() > b.second.length.value();
        return a.first < b.first;
    });
    return out;
}

std::optional<double> ExclusionDataset::crossing_length(double power) const {
    for (std::size_t i = 0; i + 1 < model_curve.size(); ++i) {
        auto [l0, p0] = model_curve[i];
        auto [l1, p1] = model_curve[i + 1];
        bool brackets = (p0 >= power && p1 <= power);
        if (!brackets) continue;
        if (p0 == p1) return l0;
        double f = (std::log(p0) - std::log(power)) /
                   (std::log(p0) - std::log(p1));
        return std::exp(std::log(l0) + f * (std::log(l1) - std::log(l0)));
    }
    return std::nullopt;
}

ExclusionDataset exclusion_dataset(
    const HeatingModel& model, const std::vector<ExperimentRecord>& records,
    const std::vector<std::pair<std::string, Quantity>>& markers,
    std::pair<Quantity, Quantity> length_range, std::size_t n_points) {
    if (length_range.first.dim() != Dimension::length() ||
        length_range.second.dim() != Dimension::length())
        throw DimensionError("length range must be lengths (m)");
    double lo = length_range.first.value();
    double hi = length_range.second.value();
    if (!(lo > 0) || !(hi > lo))
        throw InputError("length range must be positive and ordered");
    if (n_points < 2) throw InputError("need at least 2 curve points");

    ExclusionDataset ds;
    ds.model = model.kind();
    ds.length_range = {lo, hi};
    ds.model_curve.reserve(n_points);
    double log_lo = std::log(lo), log_hi = std::log(hi);
    for (std::size_t i = 0; i < n_points; ++i) {
        double frac =
            static_cast<double>(i) / static_cast<double>(n_points - 1);
        double length = std::exp(log_lo + frac * (log_hi - log_lo));
        // keep endpoints exact despite the exp/log round trip
        if (i == 0) length = lo;
        if (i == n_points - 1) length = hi;
        Quantity p = specific_power(model,
                                    Quantity{length, Dimension::length()});
        ds.model_curve.emplace_back(length, p.value());
    }

    for (const auto& r : records) {
        if (const auto* pl = std::get_if<SpecificPowerLimit>(&r.constraint))
            ds.limit_lines.push_back({r.name, pl->power.value()});
    }
    for (const auto& [label, length] : markers) {
        if (length.dim() != Dimension::length())
            throw DimensionError("marker '" + label + "' must be a length");
        ds.marker_lines.push_back({label, length.value()});
    }
    return ds;
}

} // namespace dpbound
