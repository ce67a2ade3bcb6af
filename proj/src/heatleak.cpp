#include "dpbound/heatleak.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "dpbound/stats.hpp"

namespace dpbound {

namespace {

constexpr double kConditionLimit = 1e12;

void validate_spec(const RelaxationSpec& spec) {
    if (spec.exponents.empty() && !spec.include_constant)
        throw InputError("relaxation spec has no terms at all");
    for (double a : spec.exponents) {
        if (!(a > 0) || !std::isfinite(a))
            throw InputError("relaxation exponents must be positive");
    }
    for (std::size_t i = 0; i < spec.exponents.size(); ++i)
        for (std::size_t j = i + 1; j < spec.exponents.size(); ++j)
            if (spec.exponents[i] == spec.exponents[j])
                throw InputError("relaxation exponents must be pairwise "
                                 "distinct");
    if (spec.free_exponent && spec.exponents.size() != 1)
        throw InputError("free-exponent mode requires exactly one exponent "
                         "term");
}

struct LinearFit {
    Eigen::VectorXd theta;
    Eigen::MatrixXd covariance;
    double chi2;
};

// Weighted linear least squares in the basis {t^-alpha_k, 1} via the normal
// equations. Columns are equilibrated to unit weighted norm before the
// eigenvalue-based condition estimate, so the guard reflects genuine
// collinearity rather than unit scales.
LinearFit solve_linear(const std::vector<HeatLeakSample>& samples,
                       const std::vector<double>& exponents,
                       bool include_constant) {
    const auto n = static_cast<Eigen::Index>(samples.size());
    const auto p =
        static_cast<Eigen::Index>(exponents.size() + (include_constant ? 1 : 0));

    Eigen::MatrixXd phi(n, p);
    Eigen::VectorXd y(n), w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& s = samples[static_cast<std::size_t>(i)];
        for (std::size_t k = 0; k < exponents.size(); ++k)
            phi(i, static_cast<Eigen::Index>(k)) =
                std::pow(s.t_s, -exponents[k]);
        if (include_constant) phi(i, p - 1) = 1.0;
        y(i) = s.q_w;
        w(i) = 1.0 / (s.sigma_w * s.sigma_w);
    }

    Eigen::VectorXd scale(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        double ss = 0;
        for (Eigen::Index i = 0; i < n; ++i)
            ss += w(i) * phi(i, j) * phi(i, j);
        scale(j) = std::sqrt(ss);
        if (!(scale(j) > 0) || !std::isfinite(scale(j)))
            throw SingularFitError("degenerate basis column in relaxation "
                                   "fit");
    }

    Eigen::MatrixXd phis = phi * scale.cwiseInverse().asDiagonal();
    Eigen::MatrixXd normal = phis.transpose() * w.asDiagonal() * phis;
    Eigen::VectorXd rhs = phis.transpose() * (w.array() * y.array()).matrix();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(normal);
    if (eig.info() != Eigen::Success)
        throw SingularFitError("eigendecomposition of normal equations "
                               "failed");
    const Eigen::VectorXd& lambda = eig.eigenvalues();
    double lmin = lambda.minCoeff();
    double lmax = lambda.maxCoeff();
    if (!(lmin > 0) || lmax / lmin > kConditionLimit) {
        std::ostringstream msg;
        msg << "normal equations too ill-conditioned (condition estimate ";
        if (lmin > 0)
            msg << lmax / lmin;
        else
            msg << "infinite";
        msg << ", limit " << kConditionLimit << ")";
        throw SingularFitError(msg.str());
    }

    Eigen::MatrixXd inv_scaled =
        eig.eigenvectors() * lambda.cwiseInverse().asDiagonal() *
        eig.eigenvectors().transpose();

    LinearFit out;
    Eigen::VectorXd theta_scaled = inv_scaled * rhs;
    out.theta = scale.cwiseInverse().asDiagonal() * theta_scaled;
    out.covariance = scale.cwiseInverse().asDiagonal() * inv_scaled *
                     scale.cwiseInverse().asDiagonal();
    Eigen::VectorXd resid = y - phi * out.theta;
    out.chi2 = (w.array() * resid.array().square()).sum();
    return out;
}

FitResult pack_result(const LinearFit& lin, const std::vector<double>& exps,
                      bool include_constant, std::size_t n_samples) {
    FitResult fr;
    fr.exponents = exps;
    fr.has_constant = include_constant;
    const auto p = static_cast<std::size_t>(lin.theta.size());
    fr.amplitudes.assign(lin.theta.data(),
                         lin.theta.data() + exps.size());
    if (include_constant) fr.constant = lin.theta(lin.theta.size() - 1);
    fr.covariance.resize(p * p);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j)
            fr.covariance[i * p + j] =
                lin.covariance(static_cast<Eigen::Index>(i),
                               static_cast<Eigen::Index>(j));
    fr.chi2 = lin.chi2;
    fr.dof = static_cast<int>(n_samples) - static_cast<int>(p);
    return fr;
}

// Golden-section minimization on [lo, hi]; deterministic, derivative-free.
double golden_min(const std::function<double(double)>& f, double lo,
                  double hi, double tol) {
    const double inv_gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - inv_gr * (b - a);
    double d = a + inv_gr * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_gr * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_gr * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

// Uniform double in (0, 1] from the full 64-bit state; avoids log(0) in the
// Box-Muller transform below.
double uniform_open(std::mt19937_64& rng) {
    return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
}

// std::normal_distribution is implementation-defined; this explicit
// Box-Muller keeps seeded streams identical across standard libraries.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : rng_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform_open(rng_);
        double u2 = uniform_open(rng_);
        double r = std::sqrt(-2.0 * std::log(u1));
        double angle = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(angle);
        have_spare_ = true;
        return r * std::cos(angle);
    }

    std::uint64_t next_index(std::size_t n) {
        return rng_() % static_cast<std::uint64_t>(n);
    }

private:
    std::mt19937_64 rng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    // splitmix64 finalizer over (seed, index)
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::string_view trim_view(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

double parse_double_field(std::string_view field, std::size_t line_no) {
    field = trim_view(field);
    double v = 0.0;
    auto [ptr, ec] =
        std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size())
        throw ParseError("line " + std::to_string(line_no) +
                         ": bad numeric field '" + std::string(field) + "'");
    return v;
}

} // namespace

HeatLeakSeries::HeatLeakSeries(std::vector<HeatLeakSample> samples,
                               Quantity stage_mass,
                               std::optional<Quantity> stage_moles,
                               std::string label)
    : samples_(std::move(samples)), stage_mass_(stage_mass),
      stage_moles_(stage_moles), label_(std::move(label)) {
    if (stage_mass_.dim() != Dimension::mass())
        throw DimensionError("stage mass must be a mass (kg)");
    if (!(stage_mass_.value() > 0))
        throw DomainError("stage mass must be positive");
    if (stage_moles_) {
        if (stage_moles_->dim() != Dimension::amount())
            throw DimensionError("stage moles must be an amount (mol)");
        if (!(stage_moles_->value() > 0))
            throw DomainError("stage moles must be positive");
    }
    double prev_t = 0.0;
    for (const auto& s : samples_) {
        if (!(s.t_s > 0))
            throw InputError("sample times must be positive (power-law model "
                             "diverges at t = 0)");
        if (!(s.t_s > prev_t))
            throw InputError("sample times must be strictly increasing");
        if (!(s.sigma_w > 0) || !std::isfinite(s.sigma_w))
            throw InputError("sample sigmas must be positive");
        if (!std::isfinite(s.q_w))
            throw InputError("sample values must be finite");
        prev_t = s.t_s;
    }
}

HeatLeakSeries HeatLeakSeries::read(std::istream& in) {
    std::vector<HeatLeakSample> samples;
    std::optional<double> mass_kg;
    std::optional<double> moles;
    std::string label;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view v = trim_view(line);
        if (v.empty()) continue;
        if (v.front() == '#') {
            v.remove_prefix(1);
            auto eq = v.find('=');
            if (eq == std::string_view::npos) continue; // plain comment
            std::string_view key = trim_view(v.substr(0, eq));
            std::string_view value = trim_view(v.substr(eq + 1));
            if (key == "mass_kg")
                mass_kg = parse_double_field(value, line_no);
            else if (key == "moles")
                moles = parse_double_field(value, line_no);
            else if (key == "label")
                label = std::string(value);
            // unknown keys are ignored for forward compatibility
            continue;
        }
        std::vector<std::string_view> fields;
        std::size_t pos = 0;
        while (true) {
            auto comma = v.find(',', pos);
            if (comma == std::string_view::npos) {
                fields.push_back(v.substr(pos));
                break;
            }
            fields.push_back(v.substr(pos, comma - pos));
            pos = comma + 1;
        }
        if (fields.size() != 3)
            throw ParseError("line " + std::to_string(line_no) +
                             ": expected 3 columns "
                             "t_seconds,q_watts,sigma_watts, got " +
                             std::to_string(fields.size()));
        samples.push_back({parse_double_field(fields[0], line_no),
                           parse_double_field(fields[1], line_no),
                           parse_double_field(fields[2], line_no)});
    }
    if (!mass_kg)
        throw ParseError("series file lacks required '# mass_kg = ...' "
                         "header");
    std::optional<Quantity> moles_q;
    if (moles) moles_q = Quantity{*moles, Dimension::amount()};
    return HeatLeakSeries(std::move(samples),
                          Quantity{*mass_kg, Dimension::mass()}, moles_q,
                          std::move(label));
}

HeatLeakSeries HeatLeakSeries::read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open series file '" + path.string() +
                              "'");
    return read(in);
}

void HeatLeakSeries::write(std::ostream& out) const {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%.17g", stage_mass_.value());
    out << "# mass_kg = " << buf << "\n";
    if (stage_moles_) {
        std::snprintf(buf, sizeof(buf), "%.17g", stage_moles_->value());
        out << "# moles = " << buf << "\n";
    }
    if (!label_.empty()) out << "# label = " << label_ << "\n";
    out << "# columns: t_seconds,q_watts,sigma_watts\n";
    for (const auto& s : samples_) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g", s.t_s, s.q_w,
                      s.sigma_w);
        out << buf << "\n";
    }
}

void HeatLeakSeries::write_file(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write series file '" + path.string() +
                               "'");
    write(out);
}

double FitResult::parameter_variance(std::size_t i) const {
    std::size_t p = n_parameters();
    return covariance.at(i * p + i);
}

double FitResult::constant_variance() const {
    if (!has_constant) return 0.0;
    return parameter_variance(n_parameters() - 1);
}

double FitResult::model_value(double t_s) const {
    double q = constant;
    for (std::size_t k = 0; k < exponents.size(); ++k)
        q += amplitudes[k] * std::pow(t_s, -exponents[k]);
    return q;
}

FitResult fit_relaxation(const HeatLeakSeries& series,
                         const RelaxationSpec& spec) {
    validate_spec(spec);
    const auto& samples = series.samples();
    std::size_t p = spec.exponents.size() + (spec.include_constant ? 1 : 0);
    if (samples.size() < p + 2)
        throw InputError("need at least " + std::to_string(p + 2) +
                         " samples to fit " + std::to_string(p) +
                         " parameters, got " +
                         std::to_string(samples.size()));

    if (!spec.free_exponent) {
        LinearFit lin =
            solve_linear(samples, spec.exponents, spec.include_constant);
        return pack_result(lin, spec.exponents, spec.include_constant,
                           samples.size());
    }

    // Scalar scan of the single exponent; singular probes score +inf so the
    // scan glides past them.
    auto chi2_at = [&](double alpha) {
        try {
            return solve_linear(samples, {alpha}, spec.include_constant).chi2;
        } catch (const SingularFitError&) {
            return std::numeric_limits<double>::infinity();
        }
    };
    double best = golden_min(chi2_at, 0.1, 2.0, 1e-10);
    LinearFit lin = solve_linear(samples, {best}, spec.include_constant);
    FitResult fr =
        pack_result(lin, {best}, spec.include_constant, samples.size());
    fr.fitted_exponent = best;
    fr.dof -= 1; // the scanned exponent consumes one degree of freedom
    return fr;
}

ResidualLimit residual_specific_power(const FitResult& fit,
                                      const HeatLeakSeries& series,
                                      const BackgroundBudget& background,
                                      const std::optional<Material>& material,
                                      double confidence) {
    if (!(confidence > 0 && confidence < 1))
        throw InputError("confidence must be in (0, 1)");
    if (background.molar_power.dim() != Dimension::molar_power())
        throw DimensionError("background budget must be a molar power "
                             "(W/mol)");
    if (background.molar_power.value() < 0)
        throw DomainError("background molar power must be non-negative");

    const double mass = series.stage_mass().value();
    double bg_total_w = 0.0;
    if (background.molar_power.value() > 0) {
        double moles;
        if (series.stage_moles())
            moles = series.stage_moles()->value();
        else if (material)
            moles = mass / material->molar_mass().value();
        else
            throw InputError("molar background requires stage moles or a "
                             "material with known molar mass");
        bg_total_w = background.molar_power.value() * moles;
    }

    double central = (fit.constant - bg_total_w) / mass;
    double fit_var = fit.constant_variance() / (mass * mass);
    double bg_sigma = background.uncertainty_fraction * bg_total_w / mass;
    double sigma = std::sqrt(fit_var + bg_sigma * bg_sigma);
    double z = normal_quantile(confidence);
    double floor = std::max(central, 0.0);
    double upper = std::max(floor + z * sigma, floor);

    ResidualLimit out;
    out.central = Quantity{central, Dimension::specific_power()};
    out.sigma = Quantity{sigma, Dimension::specific_power()};
    out.upper_limit = Quantity{upper, Dimension::specific_power()};
    out.confidence = confidence;
    return out;
}

LengthBound bound_from_series(const HeatLeakSeries& series,
                              const RelaxationSpec& spec,
                              const BackgroundBudget& background,
                              const std::optional<Material>& material,
                              const HeatingModel& model, double confidence) {
    FitResult fit = fit_relaxation(series, spec);
    ResidualLimit limit =
        residual_specific_power(fit, series, background, material, confidence);
    if (!(limit.upper_limit.value() > 0))
        throw UnboundedExclusionError("residual upper limit is zero: no "
                                      "finite bound");

    std::ostringstream prov;
    prov << "heat-leak fit";
    if (!series.label().empty()) prov << " of '" << series.label() << "'";
    prov << ": exponents [";
    for (std::size_t k = 0; k < fit.exponents.size(); ++k)
        prov << (k ? ", " : "") << fit.exponents[k];
    prov << "], background " << background.molar_power.value() << " W/mol +-"
         << background.uncertainty_fraction * 100 << "%, one-sided "
         << confidence * 100 << "% upper limit "
         << limit.upper_limit.value() << " W/kg";
    return invert_bound(model, limit.upper_limit, prov.str());
}

BootstrapSummary bootstrap_uncertainty(const HeatLeakSeries& series,
                                       const RelaxationSpec& spec,
                                       std::size_t n_replicates,
                                       std::uint64_t seed) {
    if (n_replicates < 100)
        throw InputError("bootstrap needs at least 100 replicates");

    FitResult base = fit_relaxation(series, spec);
    const auto& samples = series.samples();
    const std::size_t n = samples.size();

    std::vector<double> std_resid(n);
    for (std::size_t i = 0; i < n; ++i)
        std_resid[i] =
            (samples[i].q_w - base.model_value(samples[i].t_s)) /
            samples[i].sigma_w;

    std::vector<double> constants;
    constants.reserve(n_replicates);
    std::size_t dropped = 0;
    std::vector<HeatLeakSample> resampled(samples);
    for (std::size_t r = 0; r < n_replicates; ++r) {
        GaussianStream stream(mix_seed(seed, r));
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t pick =
                static_cast<std::size_t>(stream.next_index(n));
            resampled[i].q_w = base.model_value(samples[i].t_s) +
                               samples[i].sigma_w * std_resid[pick];
        }
        try {
            HeatLeakSeries replica(resampled, series.stage_mass(),
                                   series.stage_moles(), series.label());
            constants.push_back(fit_relaxation(replica, spec).constant);
        } catch (const SingularFitError&) {
            ++dropped;
        }
    }
    if (constants.empty())
        throw SingularFitError("every bootstrap replicate was singular");

    BootstrapSummary out;
    out.n_replicates = n_replicates;
    out.n_dropped = dropped;
    out.high_drop_warning =
        dropped * 10 > n_replicates; // > 10% of requested replicates
    out.mean = mean(constants);
    out.sd = sample_sd(constants);
    out.p025 = percentile(constants, 0.025);
    out.p160 = percentile(constants, 0.16);
    out.p500 = percentile(constants, 0.50);
    out.p840 = percentile(constants, 0.84);
    out.p975 = percentile(constants, 0.975);
    return out;
}

HeatLeakSeries generate_synthetic(const RelaxationSpec& spec,
                                  const std::vector<double>& amplitudes,
                                  double constant_w, double noise_fraction,
                                  std::size_t n,
                                  std::pair<double, double> t_range_s,
                                  std::uint64_t seed, Quantity stage_mass,
                                  std::optional<Quantity> stage_moles,
                                  std::string label) {
    validate_spec(spec);
    if (amplitudes.size() != spec.exponents.size())
        throw InputError("need one amplitude per exponent term");
    if (n < 4) throw InputError("synthetic series needs at least 4 samples");
    if (!(t_range_s.first > 0) || !(t_range_s.second > t_range_s.first))
        throw InputError("time range must be positive and ordered");
    if (noise_fraction < 0)
        throw InputError("noise fraction must be non-negative");

    std::vector<double> t(n), model(n);
    double log_lo = std::log(t_range_s.first);
    double log_hi = std::log(t_range_s.second);
    double max_model = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double frac =
            static_cast<double>(i) / static_cast<double>(n - 1);
        t[i] = std::exp(log_lo + frac * (log_hi - log_lo));
        // keep endpoints exact despite the exp/log round trip
        if (i == 0) t[i] = t_range_s.first;
        if (i == n - 1) t[i] = t_range_s.second;
        double q = constant_w;
        for (std::size_t k = 0; k < spec.exponents.size(); ++k)
            q += amplitudes[k] * std::pow(t[i], -spec.exponents[k]);
        model[i] = q;
        max_model = std::max(max_model, std::abs(q));
    }

    double sigma_floor = max_model > 0 ? 1e-9 * max_model : 1e-30;
    GaussianStream stream(seed);
    std::vector<HeatLeakSample> samples(n);
    for (std::size_t i = 0; i < n; ++i) {
        double sd = noise_fraction * std::abs(model[i]);
        double q = model[i] + (sd > 0 ? sd * stream.next() : 0.0);
        samples[i] = {t[i], q, std::max(sd, sigma_floor)};
    }
    return HeatLeakSeries(std::move(samples), stage_mass, stage_moles,
                          std::move(label));
}

} // namespace dpbound
