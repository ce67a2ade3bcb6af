#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dpbound/models.hpp"
#include "dpbound/quantities.hpp"

namespace dpbound {

struct HeatLeakSample {
    double t_s;     ///< seconds since cooldown start, > 0
    double q_w;     ///< measured heat leak, W
    double sigma_w; ///< 1-sigma uncertainty, W, > 0
};

/// Timestamped heat-leak measurements on one cryostat stage.
///
/// Sample times are strictly increasing and positive (the relaxation model
/// diverges at t = 0); every sigma is positive and every q finite. The file
/// format is delimited text with '#' comment lines:
///
///   # mass_kg = 17
///   # moles = 267.5          (optional)
///   # label = gloos-stage    (optional)
///   t_seconds,q_watts,sigma_watts
///
/// A missing sigma column is an error; there are no silent defaults.
class HeatLeakSeries {
public:
    HeatLeakSeries(std::vector<HeatLeakSample> samples, Quantity stage_mass,
                   std::optional<Quantity> stage_moles = {},
                   std::string label = {});

    const std::vector<HeatLeakSample>& samples() const { return samples_; }
    Quantity stage_mass() const { return stage_mass_; }
    const std::optional<Quantity>& stage_moles() const { return stage_moles_; }
    const std::string& label() const { return label_; }

    static HeatLeakSeries read(std::istream& in);
    static HeatLeakSeries read_file(const std::filesystem::path& path);
    void write(std::ostream& out) const;
    void write_file(const std::filesystem::path& path) const;

private:
    std::vector<HeatLeakSample> samples_;
    Quantity stage_mass_;
    std::optional<Quantity> stage_moles_;
    std::string label_;
};

/// Which relaxation model to fit: a sum of power-law decays A_k t^-alpha_k
/// plus an optional constant term. The default is the single ortho-para
/// exponent 3/4 with the constant on; temperature-style series use 3/8.
struct RelaxationSpec {
    std::vector<double> exponents{0.75};
    bool include_constant = true;
    /// Scan a single exponent over [0.1, 2.0] by golden section, solving the
    /// linear subproblem at every probe. Requires exactly one exponent term.
    bool free_exponent = false;
};

/// Weighted least-squares estimate. Parameter order in `covariance` is
/// amplitudes (one per exponent) followed by the constant when present.
/// With a free exponent, the covariance is the linear-parameter covariance
/// at the selected exponent; the exponent itself carries no error bar.
struct FitResult {
    std::vector<double> exponents;  ///< exponents actually used
    std::vector<double> amplitudes; ///< W s^alpha, aligned with `exponents`
    bool has_constant = true;
    double constant = 0.0; ///< W
    std::vector<double> covariance; ///< row-major p x p
    double chi2 = 0.0;
    int dof = 0;
    std::optional<double> fitted_exponent;

    std::size_t n_parameters() const {
        return amplitudes.size() + (has_constant ? 1 : 0);
    }
    double parameter_variance(std::size_t i) const;
    double constant_variance() const;
    /// Fitted model evaluated at time t.
    double model_value(double t_s) const;
};

/// Solve the weighted linear least-squares problem in the basis
/// {t^-alpha_k, 1} with weights 1/sigma^2, via the normal equations.
/// The condition number of the (column-equilibrated) normal matrix is
/// estimated from its eigenvalues; above 1e12 the fit is rejected as
/// singular.
FitResult fit_relaxation(const HeatLeakSeries& series,
                         const RelaxationSpec& spec);

/// Muon / radioactivity budget to subtract from the fitted constant term.
/// The 1 pW/mol default is the estimated cosmic-muon and radioactive-event
/// contribution in a copper demagnetization stage; the 50% fractional
/// uncertainty is a declared convention, not a measured error bar.
struct BackgroundBudget {
    Quantity molar_power{1e-12, Dimension::molar_power()}; ///< W/mol
    double uncertainty_fraction = 0.5;
};

/// Upper limit on the unmodeled time-independent specific power.
struct ResidualLimit {
    Quantity central;     ///< W/kg; may be negative after subtraction
    Quantity sigma;       ///< W/kg
    Quantity upper_limit; ///< W/kg, >= max(central, 0)
    double confidence = 0.95;
};

/// Subtract the background budget from the fitted constant, convert to
/// specific power, and combine the fit's constant-term standard error with
/// the background uncertainty in quadrature:
///
///   upper_limit = max(central, 0) + z(confidence) * sigma
///
/// with z the one-sided normal quantile. `material` supplies the molar mass
/// when the series lacks explicit moles; with a molar background and neither
/// available this is an input error.
ResidualLimit residual_specific_power(const FitResult& fit,
                                      const HeatLeakSeries& series,
                                      const BackgroundBudget& background,
                                      const std::optional<Material>& material,
                                      double confidence);

/// Full pipeline: fit, subtract background, invert the heating law at the
/// residual upper limit. Throws UnboundedExclusionError when the upper limit
/// is zero (no finite bound).
LengthBound bound_from_series(const HeatLeakSeries& series,
                              const RelaxationSpec& spec,
                              const BackgroundBudget& background,
                              const std::optional<Material>& material,
                              const HeatingModel& model, double confidence);

/// Distribution of the constant term over bootstrap replicates.
struct BootstrapSummary {
    std::size_t n_replicates = 0;
    std::size_t n_dropped = 0;        ///< replicates with singular refits
    bool high_drop_warning = false;   ///< more than 10% dropped
    double mean = 0.0;                ///< W
    double sd = 0.0;                  ///< W
    double p025 = 0.0, p160 = 0.0, p500 = 0.0, p840 = 0.0, p975 = 0.0;
};

/// Residual-resampling bootstrap of fit_relaxation. Standardized residuals
/// (r_i / sigma_i) are resampled with replacement and rescaled by the target
/// sample's sigma. Each replicate's noise stream derives deterministically
/// from (seed, replicate index), so results are independent of evaluation
/// order. Requires n_replicates >= 100.
BootstrapSummary bootstrap_uncertainty(const HeatLeakSeries& series,
                                       const RelaxationSpec& spec,
                                       std::size_t n_replicates,
                                       std::uint64_t seed);

/// Deterministic synthetic series: n log-spaced times over t_range,
/// q_i = sum_k A_k t_i^-alpha_k + constant perturbed by Gaussian noise of
/// sd = noise_fraction * model_i. sigma_i is set to that sd; when
/// noise_fraction is 0 a floor of 1e-9 * max_i |model_i| (1e-30 W if the
/// model is identically zero) keeps sigma positive. The Gaussian stream is
/// a Box-Muller transform over mt19937_64, fully specified by the seed.
HeatLeakSeries generate_synthetic(const RelaxationSpec& spec,
                                  const std::vector<double>& amplitudes,
                                  double constant_w, double noise_fraction,
                                  std::size_t n,
                                  std::pair<double, double> t_range_s,
                                  std::uint64_t seed,
                                  Quantity stage_mass = Quantity{
                                      1.0, Dimension::mass()},
                                  std::optional<Quantity> stage_moles = {},
                                  std::string label = {});

} // namespace dpbound
