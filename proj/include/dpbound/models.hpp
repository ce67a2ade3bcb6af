#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "dpbound/quantities.hpp"

namespace dpbound {

/// The two heating laws handled by this toolkit. Both predict a specific
/// power that falls off as the inverse cube of the model's length parameter:
///
///   DP:               P = G hbar / (4 sqrt(pi) R0^3)   (length parameter R0)
///   ClassicalChannel: P = G hbar / a^3                 (length parameter a)
///
/// i.e. the classical-channel prediction is the DP one multiplied by
/// 4 sqrt(pi), with R0 replaced by a.
enum class ModelKind { DP, ClassicalChannel };

std::string_view to_string(ModelKind kind);
/// Accepts "dp" and "ccg" (the CLI spellings). Empty when unrecognized.
std::optional<ModelKind> model_kind_from_string(std::string_view text);

class HeatingModel {
public:
    explicit HeatingModel(ModelKind kind, PhysicalConstants constants = {})
        : kind_(kind), constants_(constants) {}

    ModelKind kind() const { return kind_; }
    const PhysicalConstants& constants() const { return constants_; }

    /// The coefficient C of the law P = C / L^3, in W m^3 / kg.
    Quantity powerlaw_coefficient() const;

private:
    ModelKind kind_;
    PhysicalConstants constants_;
};

/// A lower bound on a heating model's length parameter, as excluded by a
/// heating measurement. Carries the model kind because R0 (DP) and a
/// (classical channel) live in different theories and must never be compared
/// against each other.
struct LengthBound {
    Quantity length;    ///< m, > 0; excluded lengths are those below it
    ModelKind model;
    std::string source; ///< provenance of the underlying limit

    /// True when this bound excludes more than `other` (larger length).
    /// Throws ModelMismatchError when the model kinds differ.
    bool stronger_than(const LengthBound& other) const;
};

/// Specific power per unit mass at the given length parameter. Strictly
/// decreasing in length, scaling as length^-3.
Quantity specific_power(const HeatingModel& model, const Quantity& length);

/// mass x specific_power.
Quantity total_power(const HeatingModel& model, const Quantity& length,
                     const Quantity& mass);

/// Closed-form inversion of the heating law: the length at which the model
/// predicts exactly `power_limit`, i.e. L = (C / P)^(1/3). A measured limit
/// P excludes all lengths below the returned value.
LengthBound invert_bound(const HeatingModel& model,
                         const Quantity& power_limit,
                         std::string source = {});

/// Nuclear wave-function spread from a Debye-Waller factor:
/// u_rms = sqrt(B / (8 pi^2)).
Quantity urms_from_debye_waller(const Quantity& B);

} // namespace dpbound
