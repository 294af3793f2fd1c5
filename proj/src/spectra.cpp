#include "afc/spectra.hpp"

#include <algorithm>
#include <cmath>

#include "afc/errors.hpp"
#include "afc/numeric.hpp"

namespace afc::spectra {

namespace {
constexpr double kCavityDenominatorTol = 1e-6;
constexpr double kAlphaMax = 200.0;  // fit domain (0, 200]
}  // namespace

double comb_finesse(const CombSpec& spec) {
    spec.validate();
    return spec.spacing_hz / spec.peak_fwhm_hz;
}

double effective_absorption(double alpha_l, double finesse) {
    if (!(finesse > 0.0)) throw ValidationError("effective_absorption: finesse must be positive");
    if (!(alpha_l >= 0.0)) throw ValidationError("effective_absorption: alphaL must be >= 0");
    return alpha_l / finesse * kGaussAreaPerFwhm;
}

double gamma_tilde(double peak_fwhm_hz) {
    if (!(peak_fwhm_hz > 0.0)) throw ValidationError("gamma_tilde: FWHM must be positive");
    return kTwoPi * peak_fwhm_hz * kFwhmToSigma;
}

double efficiency_forward(const CombSpec& spec, double t_s) {
    spec.validate();
    if (!(t_s >= 0.0)) throw ValidationError("efficiency_forward: t must be >= 0");
    const double al = effective_absorption(spec.peak_optical_depth, comb_finesse(spec));
    const double gt = gamma_tilde(spec.peak_fwhm_hz) * t_s;
    const double eta = al * al * std::exp(-al) * std::exp(-gt * gt);
    return std::clamp(eta, 0.0, 1.0);
}

double efficiency_cavity(const CombSpec& spec, const CavitySpec& cavity, double t_s) {
    spec.validate();
    cavity.validate();
    if (!(t_s >= 0.0)) throw ValidationError("efficiency_cavity: t must be >= 0");
    const double al = effective_absorption(spec.peak_optical_depth, comb_finesse(spec));
    const double gt = gamma_tilde(spec.peak_fwhm_hz) * t_s;
    const double round_trip = std::sqrt(cavity.r1 * cavity.r2) * std::exp(-al);
    if (round_trip >= 1.0 - kCavityDenominatorTol)
        throw NumericError("efficiency_cavity: cavity divergence (round-trip gain too close to 1)");
    const double denom = 1.0 - round_trip;
    const double eta = 4.0 * al * al * std::exp(-2.0 * al) * (1.0 - cavity.r1) * (1.0 - cavity.r1) *
                       cavity.r2 * std::exp(-gt * gt) / (denom * denom * denom * denom);
    return std::clamp(eta, 0.0, 1.0);
}

AbsorptionProfile build_comb_profile(const CombSpec& spec, double start_hz, double step_hz,
                                     std::size_t n_samples) {
    spec.validate();
    if (!(step_hz > 0.0) || n_samples < 2)
        throw ValidationError("build_comb_profile: invalid grid");
    if (step_hz > spec.peak_fwhm_hz / 8.0)
        throw ValidationError("build_comb_profile: grid under-resolved (need >= 8 samples per FWHM)");
    const double stop_hz = start_hz + step_hz * static_cast<double>(n_samples - 1);
    if (start_hz > spec.peak_center_hz(0) || stop_hz < spec.peak_center_hz(spec.peak_count - 1))
        throw ValidationError("build_comb_profile: grid does not span all comb peaks");

    AbsorptionProfile profile;
    profile.start_hz = start_hz;
    profile.step_hz = step_hz;
    profile.depth.assign(n_samples, 0.0);
    for (int p = 0; p < spec.peak_count; ++p) {
        const double center = spec.peak_center_hz(p);
        const double amp = spec.peak_optical_depth * spec.multiplier(p);
        for (std::size_t i = 0; i < n_samples; ++i)
            profile.depth[i] += amp * gaussian_peak(profile.freq_at(i), center, spec.peak_fwhm_hz);
    }
    return profile;
}

AlphaFit fit_alpha(const EfficiencyCurve& curve, double peak_fwhm_hz, double spacing_hz) {
    curve.validate();
    if (curve.points.size() < 3)
        throw ValidationError("fit_alpha: need at least 3 points");
    if (!(peak_fwhm_hz > 0.0) || !(spacing_hz > peak_fwhm_hz))
        throw ValidationError("fit_alpha: invalid gamma/delta");
    bool any_signal = false;
    for (const auto& p : curve.points) any_signal |= p.eta > 0.0;
    if (!any_signal) throw NumericError("fit_alpha: degenerate curve (all efficiencies zero)");

    CombSpec model;
    model.spacing_hz = spacing_hz;
    model.peak_fwhm_hz = peak_fwhm_hz;

    auto ssr = [&](double alpha) {
        model.peak_optical_depth = alpha;
        double s = 0.0;
        for (const auto& p : curve.points) {
            const double r = p.eta - efficiency_forward(model, p.t_s);
            s += r * r;
        }
        return s;
    };

    // The amplitude factor aL^2 exp(-aL) is two-to-one, so any curve admits a
    // thin and a thick alphaL root with identical residuals.  The fit is
    // pinned to the optically thick branch (effective absorption >= 2), the
    // regime of the measured combs.
    const double finesse = spacing_hz / peak_fwhm_hz;
    const double alpha_lo =
        std::min(0.99 * kAlphaMax, std::max(1e-6, 2.0 * finesse / kGaussAreaPerFwhm));
    const int kScan = 800;
    double best_alpha = kAlphaMax;
    double best_ssr = ssr(kAlphaMax);
    for (int k = kScan - 1; k >= 0; --k) {
        const double a =
            alpha_lo + (kAlphaMax - alpha_lo) * static_cast<double>(k) / kScan;
        const double s = ssr(a);
        if (s < best_ssr) {
            best_ssr = s;
            best_alpha = a;
        }
    }
    const double bracket = (kAlphaMax - alpha_lo) / kScan;
    const double lo = std::max(alpha_lo, best_alpha - bracket);
    const double hi = std::min(kAlphaMax, best_alpha + bracket);
    const double alpha = golden_minimize(lo, hi, 80, ssr);

    AlphaFit fit;
    fit.alpha_l = alpha;
    fit.residual_norm = std::sqrt(ssr(alpha));
    fit.converged = true;

    // Gauss-Newton covariance for the single parameter.
    const double h = std::max(1e-6, 1e-6 * alpha);
    double jtj = 0.0;
    for (const auto& p : curve.points) {
        model.peak_optical_depth = alpha + h;
        const double up = efficiency_forward(model, p.t_s);
        model.peak_optical_depth = std::max(1e-12, alpha - h);
        const double dn = efficiency_forward(model, p.t_s);
        const double deriv = (up - dn) / (2.0 * h);
        jtj += deriv * deriv;
    }
    if (jtj > 0.0 && curve.points.size() > 1) {
        const double sigma2 = ssr(alpha) / static_cast<double>(curve.points.size() - 1);
        fit.std_error = std::sqrt(sigma2 / jtj);
    } else {
        fit.converged = false;
    }
    fit.ci_low = std::max(0.0, alpha - 1.96 * fit.std_error);
    fit.ci_high = alpha + 1.96 * fit.std_error;
    return fit;
}

}  // namespace afc::spectra
