#include "dpbound/quantities.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace dpbound {

namespace {

struct UnitDef {
    std::string_view symbol;
    double factor;
    Dimension dim;
};

// Closed whitelist; prefixes are baked into the table rather than composed.
constexpr std::array<UnitDef, 10> kUnits{{
    {"W", 1.0, Dimension::power()},
    {"pW", 1e-12, Dimension::power()},
    {"nW", 1e-9, Dimension::power()},
    {"kg", 1.0, Dimension::mass()},
    {"g", 1e-3, Dimension::mass()},
    {"m", 1.0, Dimension::length()},
    {"pm", 1e-12, Dimension::length()},
    {"s", 1.0, Dimension::time()},
    {"K", 1.0, Dimension::temperature()},
    {"mol", 1.0, Dimension::amount()},
}};

const UnitDef* lookup_unit(std::string_view symbol) {
    for (const auto& u : kUnits) {
        if (u.symbol == symbol) return &u;
    }
    return nullptr;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

// One grammar term: symbol ('^' int)?. `invert` flips the exponent sign for
// terms following a '/'.
UnitValue parse_term(std::string_view term, bool invert) {
    std::string_view symbol = term;
    int exponent = 1;
    if (auto caret = term.find('^'); caret != std::string_view::npos) {
        symbol = term.substr(0, caret);
        std::string_view exp_text = term.substr(caret + 1);
        const char* first = exp_text.data();
        const char* last = exp_text.data() + exp_text.size();
        auto [ptr, ec] = std::from_chars(first, last, exponent);
        if (ec != std::errc{} || ptr != last)
            throw ParseError("bad unit exponent '" + std::string(exp_text) +
                             "' in term '" + std::string(term) + "'");
    }
    const UnitDef* def = lookup_unit(symbol);
    if (!def)
        throw ParseError("unknown unit token '" + std::string(symbol) + "'");
    if (invert) exponent = -exponent;
    return {std::pow(def->factor, exponent), def->dim.pow(exponent)};
}

// Canonical unit symbols used when rendering a Quantity back to text.
constexpr std::array<std::pair<Dimension, std::string_view>, 10>
    kCanonicalUnits{{
        {Dimension::mass(), "kg"},
        {Dimension::length(), "m"},
        {Dimension::time(), "s"},
        {Dimension::temperature(), "K"},
        {Dimension::amount(), "mol"},
        {Dimension::power(), "W"},
        {Dimension::specific_power(), "W/kg"},
        {Dimension::molar_power(), "W/mol"},
        {Dimension::area(), "m^2"},
        {Dimension{0, 3, 0}, "m^3"},
    }};

std::optional<std::string_view> canonical_unit(Dimension dim) {
    for (const auto& [d, symbol] : kCanonicalUnits) {
        if (d == dim) return symbol;
    }
    return std::nullopt;
}

void append_base(std::string& out, const char* symbol, int exp) {
    if (exp == 0) return;
    if (!out.empty()) out += ' ';
    out += symbol;
    if (exp != 1) {
        out += '^';
        out += std::to_string(exp);
    }
}

} // namespace

Dimension Dimension::root(int n) const {
    if (n == 0) throw DimensionError("zeroth root of a dimension");
    if (mass_ % n || length_ % n || time_ % n || temperature_ % n ||
        amount_ % n)
        throw DimensionError("dimension " + str() + " has no exact " +
                             std::to_string(n) + "-th root");
    return {mass_ / n, length_ / n, time_ / n, temperature_ / n, amount_ / n};
}

std::string Dimension::str() const {
    std::string out;
    append_base(out, "kg", mass_);
    append_base(out, "m", length_);
    append_base(out, "s", time_);
    append_base(out, "K", temperature_);
    append_base(out, "mol", amount_);
    return out.empty() ? "1" : out;
}

Quantity::Quantity(double value, Dimension dim) : value_(value), dim_(dim) {
    if (!std::isfinite(value))
        throw DomainError("quantity value is not finite");
}

double Quantity::value_in(std::string_view unit) const {
    UnitValue u = parse_unit(unit);
    if (u.dim != dim_)
        throw DimensionError("cannot express " + dim_.str() + " in '" +
                             std::string(unit) + "' (" + u.dim.str() + ")");
    return value_ / u.factor;
}

Quantity Quantity::operator*(const Quantity& o) const {
    return {value_ * o.value_, dim_ * o.dim_};
}

Quantity Quantity::operator/(const Quantity& o) const {
    return {value_ / o.value_, dim_ / o.dim_};
}

Quantity Quantity::operator*(double s) const { return {value_ * s, dim_}; }

Quantity Quantity::operator/(double s) const { return {value_ / s, dim_}; }

Quantity Quantity::operator+(const Quantity& o) const {
    if (dim_ != o.dim_)
        throw DimensionError("cannot add " + dim_.str() + " and " +
                             o.dim_.str());
    return {value_ + o.value_, dim_};
}

Quantity Quantity::operator-(const Quantity& o) const {
    if (dim_ != o.dim_)
        throw DimensionError("cannot subtract " + o.dim_.str() + " from " +
                             dim_.str());
    return {value_ - o.value_, dim_};
}

Quantity Quantity::operator-() const { return {-value_, dim_}; }

Quantity Quantity::pow(int n) const {
    return {std::pow(value_, n), dim_.pow(n)};
}

Quantity Quantity::root(int n) const {
    Dimension d = dim_.root(n);
    if (n % 2 == 0 && value_ < 0)
        throw DomainError("even root of a negative quantity");
    double v;
    if (n == 2)
        v = std::sqrt(value_);
    else if (n == 3)
        v = std::cbrt(value_);
    else
        v = std::pow(value_, 1.0 / n);
    return {v, d};
}

bool Quantity::operator==(const Quantity& o) const {
    if (dim_ != o.dim_)
        throw DimensionError("cannot compare " + dim_.str() + " with " +
                             o.dim_.str());
    return value_ == o.value_;
}

bool Quantity::operator<(const Quantity& o) const {
    if (dim_ != o.dim_)
        throw DimensionError("cannot compare " + dim_.str() + " with " +
                             o.dim_.str());
    return value_ < o.value_;
}

bool Quantity::operator<=(const Quantity& o) const { return !(o < *this); }
bool Quantity::operator>(const Quantity& o) const { return o < *this; }
bool Quantity::operator>=(const Quantity& o) const { return !(*this < o); }

std::string Quantity::str() const {
    if (auto unit = canonical_unit(dim_))
        return format_quantity(*this, *unit, 17);
    return format_significant(value_, 17) + " " + dim_.str();
}

std::ostream& operator<<(std::ostream& os, const Quantity& q) {
    return os << q.str();
}

UnitValue parse_unit(std::string_view unit) {
    if (unit.empty()) throw ParseError("empty unit");
    UnitValue out{1.0, Dimension::dimensionless()};
    std::size_t pos = 0;
    bool invert = false;
    while (true) {
        std::size_t slash = unit.find('/', pos);
        std::string_view term = slash == std::string_view::npos
                                    ? unit.substr(pos)
                                    : unit.substr(pos, slash - pos);
        if (term.empty())
            throw ParseError("empty term in unit '" + std::string(unit) + "'");
        UnitValue tv = parse_term(term, invert);
        out.factor *= tv.factor;
        out.dim = out.dim * tv.dim;
        if (slash == std::string_view::npos) break;
        pos = slash + 1;
        invert = true; // every term after a '/' divides
    }
    return out;
}

Quantity parse_quantity(std::string_view text) {
    std::string_view trimmed = trim(text);
    if (trimmed.empty()) throw ParseError("empty quantity string");

    // std::from_chars<double> keeps us locale-independent.
    const char* first = trimmed.data();
    const char* last = trimmed.data() + trimmed.size();
    double number = 0.0;
    auto [ptr, ec] = std::from_chars(first, last, number);
    if (ec == std::errc::result_out_of_range)
        throw ParseError("number out of range in '" + std::string(trimmed) +
                         "'");
    if (ec != std::errc{} || ptr == first)
        throw ParseError("malformed number in '" + std::string(trimmed) + "'");

    std::string_view unit = trim(std::string_view(
        ptr, static_cast<std::size_t>(last - ptr)));
    if (unit.empty())
        throw ParseError("missing unit in '" + std::string(trimmed) + "'");

    UnitValue u = parse_unit(unit);
    double value = number * u.factor;
    if (!std::isfinite(value))
        throw ParseError("quantity value overflows in '" +
                         std::string(trimmed) + "'");
    return {value, u.dim};
}

std::string format_significant(double value, int significant_digits) {
    significant_digits = std::clamp(significant_digits, 1, 17);
    char buf[64];
    if (value == 0.0) {
        std::snprintf(buf, sizeof(buf), "%.*f", significant_digits - 1, 0.0);
        return buf;
    }
    double mag = std::abs(value);
    int exp10 = static_cast<int>(std::floor(std::log10(mag)));
    if (exp10 >= -4 && exp10 <= significant_digits - 1) {
        int decimals = significant_digits - 1 - exp10;
        std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
    } else {
        std::snprintf(buf, sizeof(buf), "%.*e", significant_digits - 1, value);
    }
    return buf;
}

std::string format_quantity(const Quantity& q, std::string_view target_unit,
                            int significant_digits) {
    double v = q.value_in(target_unit); // throws DimensionError on mismatch
    return format_significant(v, significant_digits) + " " +
           std::string(target_unit);
}

Material::Material(std::string name, Quantity molar_mass,
                   std::optional<Quantity> debye_waller_B)
    : name_(std::move(name)), molar_mass_(molar_mass),
      debye_waller_B_(debye_waller_B) {
    if (molar_mass_.dim() != Dimension::mass() / Dimension::amount())
        throw DimensionError("molar mass of '" + name_ +
                             "' must be kg/mol, got " +
                             molar_mass_.dim().str());
    if (molar_mass_.value() <= 0)
        throw DomainError("molar mass of '" + name_ + "' must be positive");
    if (debye_waller_B_) {
        if (debye_waller_B_->dim() != Dimension::area())
            throw DimensionError("Debye-Waller factor of '" + name_ +
                                 "' must be m^2");
        if (debye_waller_B_->value() < 0)
            throw DomainError("Debye-Waller factor of '" + name_ +
                              "' must be non-negative");
    }
}

const Material& Material::copper() {
    static const Material cu{
        "copper",
        Quantity{0.063546, Dimension::mass() / Dimension::amount()},
        Quantity{1.46e-21, Dimension::area()}};
    return cu;
}

std::optional<Material> Material::find(std::string_view name) {
    if (name == "copper") return copper();
    return std::nullopt;
}

Quantity molar_to_specific(const Quantity& p, const Material& material) {
    if (p.dim() != Dimension::molar_power())
        throw DimensionError("expected a molar power (W/mol), got " +
                             p.dim().str());
    return p / material.molar_mass();
}

} // namespace dpbound
