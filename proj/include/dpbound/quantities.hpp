#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "dpbound/errors.hpp"

namespace dpbound {

/// Integer exponents over the SI base dimensions used by this toolkit:
/// mass (kg), length (m), time (s), temperature (K) and amount of
/// substance (mol). Dimension arithmetic is exact integer arithmetic;
/// multiplying quantities adds exponents, dividing subtracts them.
class Dimension {
public:
    constexpr Dimension() = default;
    constexpr Dimension(int mass, int length, int time, int temperature = 0,
                        int amount = 0)
        : mass_(static_cast<std::int8_t>(mass)),
          length_(static_cast<std::int8_t>(length)),
          time_(static_cast<std::int8_t>(time)),
          temperature_(static_cast<std::int8_t>(temperature)),
          amount_(static_cast<std::int8_t>(amount)) {}

    static constexpr Dimension dimensionless() { return {}; }
    static constexpr Dimension mass() { return {1, 0, 0}; }
    static constexpr Dimension length() { return {0, 1, 0}; }
    static constexpr Dimension time() { return {0, 0, 1}; }
    static constexpr Dimension temperature() { return {0, 0, 0, 1, 0}; }
    static constexpr Dimension amount() { return {0, 0, 0, 0, 1}; }
    static constexpr Dimension area() { return {0, 2, 0}; }
    /// W = kg m^2 s^-3
    static constexpr Dimension power() { return {1, 2, -3}; }
    static constexpr Dimension specific_power() { return {0, 2, -3}; }
    static constexpr Dimension molar_power() { return {1, 2, -3, 0, -1}; }

    constexpr int mass_exp() const { return mass_; }
    constexpr int length_exp() const { return length_; }
    constexpr int time_exp() const { return time_; }
    constexpr int temperature_exp() const { return temperature_; }
    constexpr int amount_exp() const { return amount_; }

    constexpr Dimension operator*(const Dimension& o) const {
        return {mass_ + o.mass_, length_ + o.length_, time_ + o.time_,
                temperature_ + o.temperature_, amount_ + o.amount_};
    }
    constexpr Dimension operator/(const Dimension& o) const {
        return {mass_ - o.mass_, length_ - o.length_, time_ - o.time_,
                temperature_ - o.temperature_, amount_ - o.amount_};
    }
    constexpr Dimension pow(int n) const {
        return {mass_ * n, length_ * n, time_ * n, temperature_ * n,
                amount_ * n};
    }
    /// Exact n-th root of the exponent vector; throws DimensionError if any
    /// exponent is not divisible by n.
    Dimension root(int n) const;

    constexpr bool operator==(const Dimension&) const = default;

    /// Debug rendering as a product of SI base symbols, e.g. "kg m^2 s^-3".
    /// Not part of the parseable unit grammar.
    std::string str() const;

private:
    std::int8_t mass_ = 0;
    std::int8_t length_ = 0;
    std::int8_t time_ = 0;
    std::int8_t temperature_ = 0;
    std::int8_t amount_ = 0;
};

/// A finite real value in SI base units paired with its Dimension.
///
/// Addition, subtraction and comparison require equal dimensions and throw
/// DimensionError otherwise; there is no silent coercion. Non-finite values
/// are rejected at construction.
class Quantity {
public:
    constexpr Quantity() = default;
    Quantity(double value, Dimension dim);

    double value() const { return value_; }
    Dimension dim() const { return dim_; }

    /// Value expressed in `unit` (any unit from the supported grammar with a
    /// compatible dimension). Throws DimensionError on mismatch.
    double value_in(std::string_view unit) const;

    Quantity operator*(const Quantity& o) const;
    Quantity operator/(const Quantity& o) const;
    Quantity operator*(double s) const;
    Quantity operator/(double s) const;
    Quantity operator+(const Quantity& o) const;
    Quantity operator-(const Quantity& o) const;
    Quantity operator-() const;

    Quantity pow(int n) const;
    /// Exact n-th root; dimension exponents must be divisible by n and the
    /// value non-negative for even n.
    Quantity root(int n) const;

    bool operator==(const Quantity& o) const;
    bool operator!=(const Quantity& o) const { return !(*this == o); }
    bool operator<(const Quantity& o) const;
    bool operator<=(const Quantity& o) const;
    bool operator>(const Quantity& o) const;
    bool operator>=(const Quantity& o) const;

    /// Canonical rendering at full precision (17 significant digits) in the
    /// canonical unit for this dimension when one exists (W, kg, m, s, K,
    /// mol, W/kg, W/mol, m^2, ...); such strings re-parse to the same value.
    /// Falls back to "<value> <base-dim product>" for dimensions outside the
    /// unit grammar.
    std::string str() const;

private:
    double value_ = 0.0;
    Dimension dim_{};
};

inline Quantity operator*(double s, const Quantity& q) { return q * s; }

std::ostream& operator<<(std::ostream& os, const Quantity& q);

/// Parse "<number><ws?><unit>" where unit follows the grammar
///   unit := term ('/' term)*
///   term := symbol ('^' int)?
/// and symbol is one of: W, pW, nW, kg, g, m, pm, s, K, mol.
/// Prefixes are resolved here; the stored value is SI-normalized.
Quantity parse_quantity(std::string_view text);

/// Scale factor and dimension of a unit expression from the same grammar.
struct UnitValue {
    double factor;
    Dimension dim;
};
UnitValue parse_unit(std::string_view unit);

/// Format `q` in `target_unit` with a fixed number of significant digits
/// (default 4, trailing zeros kept, scientific notation outside
/// [1e-4, 10^digits)). The result re-parses through parse_quantity; at 17
/// digits the round-trip is exact.
std::string format_quantity(const Quantity& q, std::string_view target_unit,
                            int significant_digits = 4);

/// Significant-digit rendering of a bare double, same rules as
/// format_quantity.
std::string format_significant(double value, int significant_digits);

/// Fundamental constants entering the heating laws. Immutable after
/// construction; defaults are CODATA-2018. Override by constructing an
/// explicit instance (sensitivity studies).
struct PhysicalConstants {
    double G = 6.67430e-11;        ///< gravitational constant, m^3 kg^-1 s^-2
    double hbar = 1.054571817e-34; ///< reduced Planck constant, J s

    Quantity gravitational_constant() const {
        return {G, Dimension{-1, 3, -2}};
    }
    Quantity reduced_planck() const { return {hbar, Dimension{1, 2, -1}}; }
};

/// A solid-state material entry: molar mass plus the low-temperature
/// Debye-Waller factor where known.
class Material {
public:
    Material(std::string name, Quantity molar_mass,
             std::optional<Quantity> debye_waller_B = {});

    const std::string& name() const { return name_; }
    Quantity molar_mass() const { return molar_mass_; }
    const std::optional<Quantity>& debye_waller_B() const {
        return debye_waller_B_;
    }

    /// Copper: molar mass 0.063546 kg/mol, B = 1.46e-21 m^2 at low
    /// temperature.
    static const Material& copper();
    /// Lookup among built-in materials (lowercase names). Empty when unknown.
    static std::optional<Material> find(std::string_view name);

private:
    std::string name_;
    Quantity molar_mass_;
    std::optional<Quantity> debye_waller_B_;
};

/// Convert a molar power (W/mol) to a specific power (W/kg) through the
/// material's molar mass. Linear in `p`.
Quantity molar_to_specific(const Quantity& p, const Material& material);

} // namespace dpbound
