// dpbound: heating-bound calculator for gravity-related collapse models.
//
// Subcommands: predict, invert, urms, fit, synth, catalog, plot.
// Exit codes: 0 success, 1 input/parse error, 2 domain error, 3 numerical
// failure. With --machine every command prints a single JSON document with
// fixed field names; output is bit-stable for identical inputs and seeds.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dpbound/catalog.hpp"
#include "dpbound/heatleak.hpp"
#include "dpbound/models.hpp"
#include "dpbound/quantities.hpp"
#include "dpbound/stats.hpp"

namespace {

using nlohmann::ordered_json;
using namespace dpbound;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitDomain = 2;
constexpr int kExitNumerical = 3;

void emit(bool machine, const ordered_json& doc, const std::string& human) {
    if (machine)
        std::cout << doc.dump(2) << "\n";
    else
        std::cout << human;
}

HeatingModel model_from_flag(const std::string& name) {
    auto kind = model_kind_from_string(name);
    if (!kind) throw InputError("unknown model '" + name + "'");
    return HeatingModel{*kind};
}

std::string parameter_symbol(ModelKind kind) {
    return kind == ModelKind::DP ? "R0" : "a";
}

Quantity parse_with_dim(const std::string& text, Dimension dim,
                        const std::string& what) {
    Quantity q = parse_quantity(text);
    if (q.dim() != dim)
        throw DimensionError(what + " must have dimension " + dim.str() +
                             ", got '" + text + "' (" + q.dim().str() + ")");
    return q;
}

std::string fmt_length(const Quantity& l) {
    return format_quantity(l, "pm") + " (" + format_quantity(l, "m") + ")";
}

// Derived bounds are printed at 3 significant figures: the inputs are
// order-of-magnitude limits, so more digits would overstate them.
std::string fmt_bound(const Quantity& l) {
    return format_quantity(l, "pm", 3) + " (" + format_quantity(l, "m", 4) +
           ")";
}

std::string fmt_specific(const Quantity& p) {
    return format_quantity(p, "pW/kg") + " (" + format_quantity(p, "W/kg") +
           ")";
}

std::string fmt_power(const Quantity& p) {
    return format_quantity(p, "pW") + " (" + format_quantity(p, "W") + ")";
}

// ---------------------------------------------------------------------------
// predict

struct PredictArgs {
    std::string model;
    std::string length;
    std::string mass;
};

int run_predict(const PredictArgs& a, bool machine) {
    HeatingModel model = model_from_flag(a.model);
    Quantity length =
        parse_with_dim(a.length, Dimension::length(), "--length");
    Quantity power = specific_power(model, length);

    ordered_json doc;
    doc["command"] = "predict";
    doc["model"] = a.model;
    doc["length_m"] = length.value();
    doc["specific_power_w_per_kg"] = power.value();

    std::ostringstream human;
    human << "model: " << a.model << "\n";
    human << "length parameter: " << fmt_length(length) << "\n";
    human << "specific power: " << fmt_specific(power) << "\n";
    if (!a.mass.empty()) {
        Quantity mass = parse_with_dim(a.mass, Dimension::mass(), "--mass");
        Quantity total = total_power(model, length, mass);
        doc["mass_kg"] = mass.value();
        doc["total_power_w"] = total.value();
        human << "total power for " << format_quantity(mass, "kg") << ": "
              << fmt_power(total) << "\n";
    }
    emit(machine, doc, human.str());
    return kExitOk;
}

// ---------------------------------------------------------------------------
// invert

struct InvertArgs {
    std::string model;
    std::string power;
    std::string material;
};

int run_invert(const InvertArgs& a, bool machine) {
    HeatingModel model = model_from_flag(a.model);
    Quantity limit = parse_quantity(a.power);
    ordered_json doc;
    doc["command"] = "invert";
    doc["model"] = a.model;
    std::ostringstream human;
    human << "model: " << a.model << "\n";

    if (limit.dim() == Dimension::molar_power()) {
        if (a.material.empty())
            throw InputError("a molar power limit (W/mol) requires "
                             "--material for the conversion to W/kg");
        auto material = Material::find(a.material);
        if (!material)
            throw InputError("unknown material '" + a.material + "'");
        doc["molar_power_w_per_mol"] = limit.value();
        doc["material"] = material->name();
        human << "molar limit: " << format_quantity(limit, "pW/mol") << " on "
              << material->name() << "\n";
        limit = molar_to_specific(limit, *material);
    } else if (limit.dim() != Dimension::specific_power()) {
        throw DimensionError("--power must be W/kg (or W/mol with "
                             "--material), got " +
                             limit.dim().str());
    }

    LengthBound bound = invert_bound(model, limit, "command line");
    doc["power_w_per_kg"] = limit.value();
    doc["parameter"] = parameter_symbol(model.kind());
    doc["bound_m"] = bound.length.value();

    human << "power limit: " << fmt_specific(limit) << "\n";
    human << "lower bound: " << parameter_symbol(model.kind()) << " > "
          << fmt_bound(bound.length) << "\n";
    emit(machine, doc, human.str());
    return kExitOk;
}

// ---------------------------------------------------------------------------
// urms

struct UrmsArgs {
    std::string material;
    std::string B;
};

int run_urms(const UrmsArgs& a, bool machine) {
    Quantity B{0.0, Dimension::area()};
    ordered_json doc;
    doc["command"] = "urms";
    if (!a.material.empty()) {
        auto material = Material::find(a.material);
        if (!material)
            throw InputError("unknown material '" + a.material + "'");
        if (!material->debye_waller_B())
            throw InputError("material '" + a.material +
                             "' has no Debye-Waller factor");
        B = *material->debye_waller_B();
        doc["material"] = material->name();
    } else {
        B = parse_with_dim(a.B, Dimension::area(), "--B");
    }
    Quantity u = urms_from_debye_waller(B);
    doc["debye_waller_b_m2"] = B.value();
    doc["urms_m"] = u.value();

    std::ostringstream human;
    human << "Debye-Waller factor: " << format_quantity(B, "m^2") << "\n";
    human << "u_rms = sqrt(B / 8 pi^2) = " << fmt_length(u) << "\n";
    emit(machine, doc, human.str());
    return kExitOk;
}

// ---------------------------------------------------------------------------
// fit

struct FitArgs {
    std::string input;
    std::vector<double> exponents{0.75};
    bool no_constant = false;
    bool free_exponent = false;
    std::string background = "1 pW/mol";
    double background_frac = 0.5;
    double confidence = 0.95;
    std::string material = "copper";
    std::string model = "dp";
    std::size_t bootstrap = 0;
    std::uint64_t seed = 0;
    bool seed_given = false;
    bool selftest = false;
};

int run_fit_selftest(bool machine) {
    RelaxationSpec spec;
    const double amplitude = 2.4e-9, constant = 1.7e-10;
    HeatLeakSeries series = generate_synthetic(spec, {amplitude}, constant,
                                               0.0, 64, {1e3, 3e7}, 1);
    FitResult fit = fit_relaxation(series, spec);
    double err = std::max(std::abs(fit.amplitudes[0] - amplitude) / amplitude,
                          std::abs(fit.constant - constant) / constant);
    bool pass = err < 1e-9;

    ordered_json doc;
    doc["command"] = "fit";
    doc["selftest"] = true;
    doc["true_amplitude_w_s_alpha"] = amplitude;
    doc["true_constant_w"] = constant;
    doc["fit_amplitude_w_s_alpha"] = fit.amplitudes[0];
    doc["fit_constant_w"] = fit.constant;
    doc["max_relative_error"] = err;
    doc["threshold"] = 1e-9;
    doc["pass"] = pass;

    std::ostringstream human;
    human << "synthetic self-test: noiseless q(t) = A t^-0.75 + Q0\n";
    human << "  max relative recovery error = " << format_significant(err, 3)
          << " (threshold 1e-9)\n";
    human << (pass ? "exact recovery: PASS\n" : "exact recovery: FAIL\n");
    emit(machine, doc, human.str());
    return pass ? kExitOk : kExitNumerical;
}

int run_fit(const FitArgs& a, bool machine) {
    if (a.selftest) return run_fit_selftest(machine);
    if (a.input.empty())
        throw InputError("--input is required (or use --synthetic-selftest)");
    if (a.bootstrap > 0 && !a.seed_given)
        throw InputError("--bootstrap requires an explicit --seed");

    HeatLeakSeries series = HeatLeakSeries::read_file(a.input);
    RelaxationSpec spec;
    spec.exponents = a.exponents;
    spec.include_constant = !a.no_constant;
    spec.free_exponent = a.free_exponent;

    HeatingModel model = model_from_flag(a.model);
    BackgroundBudget background{
        parse_with_dim(a.background, Dimension::molar_power(),
                       "--background"),
        a.background_frac};
    std::optional<Material> material;
    if (!a.material.empty()) {
        material = Material::find(a.material);
        if (!material)
            throw InputError("unknown material '" + a.material + "'");
    }

    FitResult fit = fit_relaxation(series, spec);
    ResidualLimit residual = residual_specific_power(fit, series, background,
                                                     material, a.confidence);
    std::optional<LengthBound> bound;
    if (residual.upper_limit.value() > 0)
        bound = invert_bound(model, residual.upper_limit, "heat-leak fit");

    ordered_json doc;
    doc["command"] = "fit";
    doc["input"] = a.input;
    doc["label"] = series.label();
    doc["n_samples"] = series.samples().size();
    doc["mass_kg"] = series.stage_mass().value();
    if (series.stage_moles())
        doc["moles"] = series.stage_moles()->value();
    doc["exponents"] = fit.exponents;
    doc["free_exponent"] = spec.free_exponent;
    doc["include_constant"] = spec.include_constant;
    doc["amplitudes_w_s_alpha"] = fit.amplitudes;
    ordered_json amp_sigmas = ordered_json::array();
    for (std::size_t k = 0; k < fit.amplitudes.size(); ++k)
        amp_sigmas.push_back(std::sqrt(fit.parameter_variance(k)));
    doc["amplitude_sigmas_w_s_alpha"] = amp_sigmas;
    doc["constant_w"] = fit.constant;
    doc["constant_sigma_w"] = std::sqrt(fit.constant_variance());
    if (fit.fitted_exponent) doc["fitted_exponent"] = *fit.fitted_exponent;
    doc["chi2"] = fit.chi2;
    doc["dof"] = fit.dof;
    doc["background_w_per_mol"] = background.molar_power.value();
    doc["background_fraction"] = background.uncertainty_fraction;
    doc["confidence"] = a.confidence;
    doc["residual_central_w_per_kg"] = residual.central.value();
    doc["residual_sigma_w_per_kg"] = residual.sigma.value();
    doc["residual_upper_limit_w_per_kg"] = residual.upper_limit.value();
    doc["model"] = a.model;
    if (bound) {
        doc["parameter"] = parameter_symbol(model.kind());
        doc["bound_m"] = bound->length.value();
    } else {
        doc["bound_m"] = nullptr;
    }

    std::ostringstream human;
    human << "series: "
          << (series.label().empty() ? std::string("(unlabeled)")
                                     : series.label())
          << " (" << series.samples().size() << " samples, mass "
          << format_quantity(series.stage_mass(), "kg") << ")\n";
    human << "fit: q(t) = ";
    for (std::size_t k = 0; k < fit.exponents.size(); ++k)
        human << "A" << k + 1 << " t^-" << fit.exponents[k] << " + ";
    human << (spec.include_constant ? "Q0" : "0") << "\n";
    for (std::size_t k = 0; k < fit.amplitudes.size(); ++k)
        human << "  A" << k + 1 << " = "
              << format_significant(fit.amplitudes[k], 4) << " +- "
              << format_significant(std::sqrt(fit.parameter_variance(k)), 3)
              << " W s^" << fit.exponents[k] << "\n";
    if (spec.include_constant)
        human << "  Q0 = "
              << fmt_power(Quantity{fit.constant, Dimension::power()})
              << " +- "
              << format_quantity(Quantity{std::sqrt(fit.constant_variance()),
                                          Dimension::power()},
                                 "pW")
              << "\n";
    if (fit.fitted_exponent)
        human << "  fitted exponent = "
              << format_significant(*fit.fitted_exponent, 6) << "\n";
    human << "  chi2/dof = " << format_significant(fit.chi2, 4) << "/"
          << fit.dof << "\n";
    human << "residual specific power (background "
          << format_quantity(background.molar_power, "pW/mol") << " +- "
          << background.uncertainty_fraction * 100 << "%):\n";
    human << "  central = " << fmt_specific(residual.central) << "\n";
    human << "  sigma = " << fmt_specific(residual.sigma) << "\n";
    human << "  upper limit (one-sided " << a.confidence * 100
          << "%) = " << fmt_specific(residual.upper_limit) << "\n";
    if (bound)
        human << "bound: " << parameter_symbol(model.kind()) << " > "
              << fmt_bound(bound->length) << "\n";
    else
        human << "bound: no finite bound (upper limit is zero)\n";

    if (a.bootstrap > 0) {
        BootstrapSummary bs =
            bootstrap_uncertainty(series, spec, a.bootstrap, a.seed);
        ordered_json bj;
        bj["n_replicates"] = bs.n_replicates;
        bj["n_dropped"] = bs.n_dropped;
        bj["high_drop_warning"] = bs.high_drop_warning;
        bj["seed"] = a.seed;
        bj["mean_w"] = bs.mean;
        bj["sd_w"] = bs.sd;
        bj["p025_w"] = bs.p025;
        bj["p160_w"] = bs.p160;
        bj["p500_w"] = bs.p500;
        bj["p840_w"] = bs.p840;
        bj["p975_w"] = bs.p975;
        doc["bootstrap"] = bj;
        human << "bootstrap of the constant term (" << bs.n_replicates
              << " replicates, seed " << a.seed << "):\n";
        human << "  mean = "
              << fmt_power(Quantity{bs.mean, Dimension::power()})
              << ", sd = "
              << format_quantity(Quantity{bs.sd, Dimension::power()}, "pW")
              << "\n";
        human << "  p2.5 = "
              << format_quantity(Quantity{bs.p025, Dimension::power()}, "pW")
              << ", p97.5 = "
              << format_quantity(Quantity{bs.p975, Dimension::power()}, "pW")
              << "\n";
        if (bs.n_dropped > 0)
            human << "  dropped replicates: " << bs.n_dropped
                  << (bs.high_drop_warning ? " (WARNING: above 10%)" : "")
                  << "\n";
    }
    emit(machine, doc, human.str());
    return kExitOk;
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
    std::string out;
    std::vector<double> exponents{0.75};
    std::vector<double> amplitudes;
    double constant = 0.0;
    double noise = 0.0;
    std::size_t n = 0;
    double t_min = 0.0;
    double t_max = 0.0;
    std::uint64_t seed = 0;
    double mass = 1.0;
    double moles = 0.0;
    std::string label;
};

int run_synth(const SynthArgs& a, bool machine) {
    RelaxationSpec spec;
    spec.exponents = a.exponents;
    std::optional<Quantity> moles;
    if (a.moles > 0) moles = Quantity{a.moles, Dimension::amount()};
    HeatLeakSeries series = generate_synthetic(
        spec, a.amplitudes, a.constant, a.noise, a.n, {a.t_min, a.t_max},
        a.seed, Quantity{a.mass, Dimension::mass()}, moles, a.label);
    series.write_file(a.out);

    ordered_json doc;
    doc["command"] = "synth";
    doc["out"] = a.out;
    doc["n_samples"] = series.samples().size();
    doc["exponents"] = a.exponents;
    doc["amplitudes_w_s_alpha"] = a.amplitudes;
    doc["constant_w"] = a.constant;
    doc["noise_fraction"] = a.noise;
    doc["t_min_s"] = a.t_min;
    doc["t_max_s"] = a.t_max;
    doc["seed"] = a.seed;
    doc["mass_kg"] = a.mass;
    if (moles) doc["moles"] = moles->value();
    doc["label"] = a.label;

    std::ostringstream human;
    human << "wrote " << series.samples().size() << " synthetic samples to "
          << a.out << " (seed " << a.seed << ")\n";
    emit(machine, doc, human.str());
    return kExitOk;
}

// ---------------------------------------------------------------------------
// catalog

ordered_json record_json(const ExperimentRecord& r) {
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

int run_catalog_list(const Catalog& catalog, bool machine) {
    ordered_json doc;
    doc["command"] = "catalog-list";
    doc["version"] = catalog.version();
    doc["records"] = ordered_json::array();
    for (const auto& r : catalog.records())
        doc["records"].push_back(record_json(r));
    doc["annotations"] = catalog.annotations();

    std::ostringstream human;
    human << "catalog version " << catalog.version() << ", "
          << catalog.records().size() << " records\n";
    for (const auto& r : catalog.records()) {
        human << "  " << r.name << ": ";
        if (const auto* pl = std::get_if<SpecificPowerLimit>(&r.constraint))
            human << "specific-power limit "
                  << fmt_specific(pl->power);
        else {
            const auto& db = std::get<DirectLengthBound>(r.constraint);
            human << "direct length bound " << fmt_length(db.length) << " ["
                  << to_string(db.model) << "]";
        }
        if (r.material) human << ", material " << *r.material;
        human << "\n    " << r.provenance << "\n";
    }
    for (const auto& note : catalog.annotations())
        human << "note: " << note << "\n";
    emit(machine, doc, human.str());
    return kExitOk;
}

int run_catalog_derive(const Catalog& catalog, const std::string& record,
                       const std::string& model_name, bool machine) {
    HeatingModel model = model_from_flag(model_name);
    const ExperimentRecord& rec = catalog.find(record);
    LengthBound bound = derive_bound(rec, model);

    ordered_json doc;
    doc["command"] = "catalog-derive";
    doc["record"] = rec.name;
    doc["model"] = model_name;
    doc["parameter"] = parameter_symbol(model.kind());
    doc["bound_m"] = bound.length.value();
    doc["provenance"] = bound.source;

    std::ostringstream human;
    human << rec.name << " under " << model_name << ": "
          << parameter_symbol(model.kind()) << " > "
          << fmt_bound(bound.length) << "\n";
    human << "  provenance: " << bound.source << "\n";
    emit(machine, doc, human.str());
    return kExitOk;
}

int run_catalog_rank(const Catalog& catalog, const std::string& model_name,
                     bool machine) {
    HeatingModel model = model_from_flag(model_name);
    std::vector<ExperimentRecord> applicable;
    std::vector<std::string> skipped;
    for (const auto& r : catalog.records()) {
        const auto* direct = std::get_if<DirectLengthBound>(&r.constraint);
        if (direct && direct->model != model.kind()) {
            skipped.push_back(r.name);
            continue;
        }
        applicable.push_back(r);
    }
    for (const auto& name : skipped)
        std::cerr << "note: skipping '" << name
                  << "' (direct bound for a different model)\n";
    auto ranked = rank_bounds(applicable, model);

    ordered_json doc;
    doc["command"] = "catalog-rank";
    doc["model"] = model_name;
    doc["parameter"] = parameter_symbol(model.kind());
    doc["ranking"] = ordered_json::array();
    for (const auto& [name, bound] : ranked) {
        ordered_json e;
        e["name"] = name;
        e["bound_m"] = bound.length.value();
        doc["ranking"].push_back(e);
    }
    doc["skipped"] = skipped;

    std::ostringstream human;
    human << "ranking under " << model_name << " (strongest first):\n";
    std::size_t i = 1;
    for (const auto& [name, bound] : ranked)
        human << "  " << i++ << ". " << name << ": "
              << parameter_symbol(model.kind()) << " > "
              << fmt_bound(bound.length) << "\n";
    emit(machine, doc, human.str());
    return kExitOk;
}

// ---------------------------------------------------------------------------
// plot

struct PlotArgs {
    std::string model = "dp";
    std::string records;
    std::string markers;
    std::string range;
    std::size_t points = 200;
    std::string out;
    std::string format;
};

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        auto next = text.find(sep, pos);
        if (next == std::string::npos) {
            out.push_back(text.substr(pos));
            return out;
        }
        out.push_back(text.substr(pos, next - pos));
        pos = next + 1;
    }
}

int run_plot(const Catalog& catalog, const PlotArgs& a, bool machine) {
    HeatingModel model = model_from_flag(a.model);

    std::vector<ExperimentRecord> records;
    if (a.records.empty()) {
        records = catalog.records();
    } else {
        for (const auto& name : split(a.records, ','))
            records.push_back(catalog.find(name));
    }

    std::vector<std::pair<std::string, Quantity>> markers;
    if (!a.markers.empty()) {
        for (const auto& token : split(a.markers, ',')) {
            auto colon = token.find(':');
            if (colon == std::string::npos)
                throw InputError("marker '" + token +
                                 "' must be label:material or label:length");
            std::string label = token.substr(0, colon);
            std::string value = token.substr(colon + 1);
            if (auto material = Material::find(value)) {
                if (!material->debye_waller_B())
                    throw InputError("material '" + value +
                                     "' has no Debye-Waller factor");
                markers.emplace_back(
                    label, urms_from_debye_waller(*material->debye_waller_B()));
            } else {
                markers.emplace_back(
                    label,
                    parse_with_dim(value, Dimension::length(), "marker"));
            }
        }
    }

    auto range_parts = split(a.range, ':');
    if (range_parts.size() != 2)
        throw InputError("--range must be '<min>:<max>', e.g. '1pm:10pm'");
    auto range = std::pair{
        parse_with_dim(range_parts[0], Dimension::length(), "--range"),
        parse_with_dim(range_parts[1], Dimension::length(), "--range")};

    ExclusionDataset ds =
        exclusion_dataset(model, records, markers, range, a.points);

    std::string format = a.format;
    if (format.empty()) {
        format = a.out.size() > 4 && a.out.substr(a.out.size() - 4) == ".svg"
                     ? "svg"
                     : "csv";
    }
    if (format != "csv" && format != "svg")
        throw InputError("unknown plot format '" + format + "'");
    std::ofstream out(a.out);
    if (!out) throw InputError("cannot write plot file '" + a.out + "'");
    if (format == "svg")
        write_dataset_svg(ds, out);
    else
        write_dataset_csv(ds, out);
    out.close();

    ordered_json doc;
    doc["command"] = "plot";
    doc["model"] = a.model;
    doc["out"] = a.out;
    doc["format"] = format;
    doc["n_points"] = ds.model_curve.size();
    doc["length_range_m"] = {ds.length_range.first, ds.length_range.second};
    doc["limits"] = ordered_json::array();
    for (const auto& limit : ds.limit_lines) {
        ordered_json e;
        e["label"] = limit.label;
        e["power_w_per_kg"] = limit.power;
        if (auto crossing = ds.crossing_length(limit.power))
            e["crossing_length_m"] = *crossing;
        else
            e["crossing_length_m"] = nullptr;
        doc["limits"].push_back(e);
    }
    doc["markers"] = ordered_json::array();
    for (const auto& marker : ds.marker_lines) {
        ordered_json e;
        e["label"] = marker.label;
        e["length_m"] = marker.length;
        doc["markers"].push_back(e);
    }

    std::ostringstream human;
    human << "wrote " << format << " exclusion dataset to " << a.out << " ("
          << ds.model_curve.size() << " curve points, "
          << ds.limit_lines.size() << " limits, " << ds.marker_lines.size()
          << " markers)\n";
    for (const auto& limit : ds.limit_lines) {
        if (auto crossing = ds.crossing_length(limit.power))
            human << "  curve crosses '" << limit.label << "' at "
                  << fmt_length(Quantity{*crossing, Dimension::length()})
                  << "\n";
    }
    emit(machine, doc, human.str());
    return kExitOk;
}

int classify(const std::exception& e) {
    if (dynamic_cast<const SingularFitError*>(&e)) return kExitNumerical;
    if (dynamic_cast<const DomainError*>(&e)) return kExitDomain;
    if (dynamic_cast<const DimensionError*>(&e)) return kExitDomain;
    if (dynamic_cast<const ModelMismatchError*>(&e)) return kExitDomain;
    if (dynamic_cast<const UnboundedExclusionError*>(&e)) return kExitDomain;
    return kExitInput; // ParseError, InputError, io failures
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"heating bounds for gravity-related collapse models"};
    app.require_subcommand(1);
    bool machine = false;

    PredictArgs predict_args;
    auto* predict = app.add_subcommand(
        "predict", "specific (and total) heating power at a length");
    predict->add_option("--model", predict_args.model, "dp or ccg")
        ->required();
    predict
        ->add_option("--length", predict_args.length,
                     "length parameter, e.g. \"4.3 pm\"")
        ->required();
    predict->add_option("--mass", predict_args.mass,
                        "optional system mass, e.g. \"17 kg\"");
    predict->add_flag("--machine", machine, "JSON output");

    InvertArgs invert_args;
    auto* invert = app.add_subcommand(
        "invert", "length bound implied by a specific-power limit");
    invert->add_option("--model", invert_args.model, "dp or ccg")->required();
    invert
        ->add_option("--power", invert_args.power,
                     "limit, e.g. \"10 pW/kg\" or \"1 pW/mol\"")
        ->required();
    invert->add_option("--material", invert_args.material,
                       "material for molar conversion (e.g. copper)");
    invert->add_flag("--machine", machine, "JSON output");

    UrmsArgs urms_args;
    auto* urms = app.add_subcommand(
        "urms", "nuclear wave-function spread from a Debye-Waller factor");
    auto* urms_material = urms->add_option(
        "--material", urms_args.material, "built-in material (e.g. copper)");
    auto* urms_b = urms->add_option("--B", urms_args.B,
                                    "Debye-Waller factor, e.g. "
                                    "\"0.146e-20 m^2\"");
    urms_material->excludes(urms_b);
    urms->add_flag("--machine", machine, "JSON output");

    FitArgs fit_args;
    auto* fit = app.add_subcommand(
        "fit", "decompose a heat-leak series and derive a bound");
    fit->add_option("--input", fit_args.input, "series file "
                                               "(t_seconds,q_watts,"
                                               "sigma_watts)");
    fit->add_option("--exponents", fit_args.exponents,
                    "relaxation exponents (default 0.75)")
        ->delimiter(',');
    fit->add_flag("--no-constant", fit_args.no_constant,
                  "fit without a constant term");
    fit->add_flag("--free-exponent", fit_args.free_exponent,
                  "scan a single exponent over [0.1, 2.0]");
    fit->add_option("--background", fit_args.background,
                    "molar background budget (default \"1 pW/mol\")");
    fit->add_option("--background-frac", fit_args.background_frac,
                    "fractional background uncertainty (default 0.5)");
    fit->add_option("--confidence", fit_args.confidence,
                    "one-sided confidence for the upper limit (default "
                    "0.95)");
    fit->add_option("--material", fit_args.material,
                    "material for molar conversions (default copper; "
                    "use \"\" to disable)");
    fit->add_option("--model", fit_args.model,
                    "heating model for the bound (default dp)");
    fit->add_option("--bootstrap", fit_args.bootstrap,
                    "number of bootstrap replicates (>= 100)");
    auto* fit_seed =
        fit->add_option("--seed", fit_args.seed, "bootstrap seed");
    fit->add_flag("--synthetic-selftest", fit_args.selftest,
                  "run the internal noiseless recovery check");
    fit->add_flag("--machine", machine, "JSON output");

    SynthArgs synth_args;
    auto* synth = app.add_subcommand(
        "synth", "generate a deterministic synthetic heat-leak series");
    synth->add_option("--out", synth_args.out, "output file")->required();
    synth->add_option("--exponents", synth_args.exponents,
                      "relaxation exponents (default 0.75)")
        ->delimiter(',');
    synth
        ->add_option("--amplitudes", synth_args.amplitudes,
                     "amplitudes in W s^alpha, one per exponent")
        ->delimiter(',')
        ->required();
    synth->add_option("--constant", synth_args.constant,
                      "constant term in W (default 0)");
    synth->add_option("--noise", synth_args.noise,
                      "relative Gaussian noise (default 0)");
    synth->add_option("--n", synth_args.n, "number of samples")->required();
    synth->add_option("--t-min", synth_args.t_min, "first sample time, s")
        ->required();
    synth->add_option("--t-max", synth_args.t_max, "last sample time, s")
        ->required();
    synth->add_option("--seed", synth_args.seed, "noise seed (mandatory)")
        ->required();
    synth->add_option("--mass", synth_args.mass, "stage mass in kg "
                                                 "(default 1)");
    synth->add_option("--moles", synth_args.moles, "stage moles (optional)");
    synth->add_option("--label", synth_args.label, "series label");
    synth->add_flag("--machine", machine, "JSON output");

    std::string catalog_model = "dp";
    std::string catalog_record;
    auto* catalog_cmd =
        app.add_subcommand("catalog", "query the experiment registry");
    catalog_cmd->require_subcommand(1);
    auto* cat_list = catalog_cmd->add_subcommand("list", "list all records");
    cat_list->add_flag("--machine", machine, "JSON output");
    auto* cat_derive = catalog_cmd->add_subcommand(
        "derive", "derive the bound from one record");
    cat_derive->add_option("--record", catalog_record, "record name")
        ->required();
    cat_derive->add_option("--model", catalog_model, "dp or ccg");
    cat_derive->add_flag("--machine", machine, "JSON output");
    auto* cat_rank = catalog_cmd->add_subcommand(
        "rank", "rank records by exclusion strength");
    cat_rank->add_option("--model", catalog_model, "dp or ccg");
    cat_rank->add_flag("--machine", machine, "JSON output");

    PlotArgs plot_args;
    auto* plot = app.add_subcommand(
        "plot", "emit an exclusion-plot dataset (csv or svg)");
    plot->add_option("--model", plot_args.model, "dp or ccg");
    plot->add_option("--records", plot_args.records,
                     "comma-separated record names (default: all)");
    plot->add_option("--markers", plot_args.markers,
                     "comma-separated label:material or label:length");
    plot->add_option("--range", plot_args.range,
                     "length range '<min>:<max>', e.g. '1pm:10pm'")
        ->required();
    plot->add_option("--points", plot_args.points,
                     "curve samples (default 200)");
    plot->add_option("--out", plot_args.out, "output path")->required();
    plot->add_option("--format", plot_args.format,
                     "csv or svg (default from extension)");
    plot->add_flag("--machine", machine, "JSON output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInput;
    }
    fit_args.seed_given = fit_seed->count() > 0;

    try {
        if (*predict) return run_predict(predict_args, machine);
        if (*invert) return run_invert(invert_args, machine);
        if (*urms) {
            if (urms_args.material.empty() && urms_args.B.empty())
                throw InputError("urms needs --material or --B");
            return run_urms(urms_args, machine);
        }
        if (*fit) return run_fit(fit_args, machine);
        if (*synth) return run_synth(synth_args, machine);
        if (*catalog_cmd) {
            Catalog catalog = Catalog::from_environment();
            if (*cat_list) return run_catalog_list(catalog, machine);
            if (*cat_derive)
                return run_catalog_derive(catalog, catalog_record,
                                          catalog_model, machine);
            if (*cat_rank)
                return run_catalog_rank(catalog, catalog_model, machine);
        }
        if (*plot)
            return run_plot(Catalog::from_environment(), plot_args, machine);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return classify(e);
    }
    return kExitInput;
}
