#include "dpbound/models.hpp"

#include <cmath>
#include <numbers>

namespace dpbound {

namespace {

double four_sqrt_pi() {
    static const double v = 4.0 * std::sqrt(std::numbers::pi);
    return v;
}

} // namespace

std::string_view to_string(ModelKind kind) {
    switch (kind) {
    case ModelKind::DP:
        return "dp";
    case ModelKind::ClassicalChannel:
        return "ccg";
    }
    return "?";
}

std::optional<ModelKind> model_kind_from_string(std::string_view text) {
    if (text == "dp" || text == "DP") return ModelKind::DP;
    if (text == "ccg" || text == "CCG") return ModelKind::ClassicalChannel;
    return std::nullopt;
}

Quantity HeatingModel::powerlaw_coefficient() const {
    Quantity g_hbar =
        constants_.gravitational_constant() * constants_.reduced_planck();
    if (kind_ == ModelKind::DP) return g_hbar / four_sqrt_pi();
    return g_hbar;
}

bool LengthBound::stronger_than(const LengthBound& other) const {
    if (model != other.model)
        throw ModelMismatchError(
            "cannot compare bounds across heating models (" +
            std::string(to_string(model)) + " vs " +
            std::string(to_string(other.model)) + ")");
    return length.value() > other.length.value();
}

Quantity specific_power(const HeatingModel& model, const Quantity& length) {
    if (length.dim() != Dimension::length())
        throw DimensionError("specific_power expects a length, got " +
                             length.dim().str());
    if (!(length.value() > 0))
        throw DomainError("length parameter must be positive");
    return model.powerlaw_coefficient() / length.pow(3);
}

Quantity total_power(const HeatingModel& model, const Quantity& length,
                     const Quantity& mass) {
    if (mass.dim() != Dimension::mass())
        throw DimensionError("total_power expects a mass, got " +
                             mass.dim().str());
    if (mass.value() < 0) throw DomainError("mass must be non-negative");
    return mass * specific_power(model, length);
}

LengthBound invert_bound(const HeatingModel& model,
                         const Quantity& power_limit, std::string source) {
    if (power_limit.dim() != Dimension::specific_power())
        throw DimensionError("invert_bound expects a specific power (W/kg), "
                             "got " +
                             power_limit.dim().str());
    if (!(power_limit.value() > 0))
        throw DomainError("specific-power limit must be positive");
    Quantity length = (model.powerlaw_coefficient() / power_limit).root(3);
    return {length, model.kind(), std::move(source)};
}

Quantity urms_from_debye_waller(const Quantity& B) {
    if (B.dim() != Dimension::area())
        throw DimensionError("Debye-Waller factor must be an area (m^2), "
                             "got " +
                             B.dim().str());
    if (B.value() < 0)
        throw DomainError("Debye-Waller factor must be non-negative");
    const double eight_pi_sq = 8.0 * std::numbers::pi * std::numbers::pi;
    return (B / eight_pi_sq).root(2);
}

} // namespace dpbound
