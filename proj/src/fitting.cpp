// Gaussian peak fitting on absorption profiles (GSL trust-region
// Levenberg-Marquardt).  The fit runs in normalized coordinates (amplitudes
// in units of the profile maximum, frequencies in units of the grid span) so
// the optimizer tolerances behave uniformly.

#include <gsl/gsl_blas.h>
#include <gsl/gsl_multifit_nlinear.h>
#include <gsl/gsl_vector.h>

#include <algorithm>
#include <cmath>
#include <memory>

#include "afc/errors.hpp"
#include "afc/numeric.hpp"
#include "afc/readout.hpp"

namespace afc::readout {

namespace {

constexpr double kLn16 = 4.0 * 0.6931471805599453;  // 4 ln 2

struct FitData {
    std::vector<double> x;  // normalized frequency
    std::vector<double> y;  // normalized depth
    int n_peaks = 0;
    std::vector<double>* history = nullptr;
};

int residual_f(const gsl_vector* p, void* params, gsl_vector* f) {
    const auto* data = static_cast<const FitData*>(params);
    for (std::size_t i = 0; i < data->x.size(); ++i) {
        double model = 0.0;
        for (int j = 0; j < data->n_peaks; ++j) {
            const double amp = gsl_vector_get(p, 3 * j);
            const double center = gsl_vector_get(p, 3 * j + 1);
            const double fwhm = gsl_vector_get(p, 3 * j + 2);
            const double u = (data->x[i] - center) / fwhm;
            model += amp * std::exp(-kLn16 * u * u);
        }
        gsl_vector_set(f, i, model - data->y[i]);
    }
    return GSL_SUCCESS;
}

int residual_df(const gsl_vector* p, void* params, gsl_matrix* jac) {
    const auto* data = static_cast<const FitData*>(params);
    for (std::size_t i = 0; i < data->x.size(); ++i) {
        for (int j = 0; j < data->n_peaks; ++j) {
            const double amp = gsl_vector_get(p, 3 * j);
            const double center = gsl_vector_get(p, 3 * j + 1);
            const double fwhm = gsl_vector_get(p, 3 * j + 2);
            const double u = (data->x[i] - center) / fwhm;
            const double g = std::exp(-kLn16 * u * u);
            gsl_matrix_set(jac, i, 3 * j, g);
            gsl_matrix_set(jac, i, 3 * j + 1, amp * g * 2.0 * kLn16 * u / fwhm);
            gsl_matrix_set(jac, i, 3 * j + 2, amp * g * 2.0 * kLn16 * u * u / fwhm);
        }
    }
    return GSL_SUCCESS;
}

void record_chisq(const std::size_t, void* params, const gsl_multifit_nlinear_workspace* w) {
    auto* data = static_cast<FitData*>(params);
    const gsl_vector* f = gsl_multifit_nlinear_residual(w);
    double chisq = 0.0;
    gsl_blas_ddot(f, f, &chisq);
    data->history->push_back(chisq);
}

/// Walk out to the half-maximum crossings around a local maximum.
double estimate_fwhm(const AbsorptionProfile& prof, std::size_t peak) {
    const double half = 0.5 * prof.depth[peak];
    std::size_t left = peak;
    while (left > 0 && prof.depth[left] > half) --left;
    std::size_t right = peak;
    while (right + 1 < prof.size() && prof.depth[right] > half) ++right;
    const double width = prof.step_hz * static_cast<double>(right - left);
    return std::max(width, prof.step_hz);
}

}  // namespace

PeakFitResult fit_peaks(const AbsorptionProfile& profile, int n_peaks) {
    profile.validate();
    if (n_peaks < 1) throw ValidationError("fit_peaks: n_peaks must be >= 1");

    auto candidates = local_maxima(profile.depth);
    std::sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
        if (profile.depth[a] != profile.depth[b]) return profile.depth[a] > profile.depth[b];
        return a < b;
    });
    // Greedy selection by height; noise ripple creates clusters of maxima on
    // one peak, so candidates inside the half-width of a taller pick are its
    // ripple, not a new peak.
    std::vector<std::size_t> maxima;
    for (std::size_t idx : candidates) {
        if (maxima.size() == static_cast<std::size_t>(n_peaks)) break;
        const double min_gap = 0.5 * estimate_fwhm(profile, idx) / profile.step_hz;
        bool close = false;
        for (std::size_t picked : maxima)
            close = close || std::abs(static_cast<double>(idx) - static_cast<double>(picked)) <
                                 min_gap;
        if (!close) maxima.push_back(idx);
    }
    if (maxima.size() < static_cast<std::size_t>(n_peaks))
        throw NumericError("fit_peaks: degenerate input (fewer resolvable maxima than peaks)");
    std::sort(maxima.begin(), maxima.end());

    const double span = profile.span_hz();
    const double depth_scale = *std::max_element(profile.depth.begin(), profile.depth.end());
    if (!(depth_scale > 0.0)) throw NumericError("fit_peaks: profile is identically zero");

    PeakFitResult result;
    FitData data;
    data.n_peaks = n_peaks;
    data.history = &result.residual_history;
    data.x.resize(profile.size());
    data.y.resize(profile.size());
    for (std::size_t i = 0; i < profile.size(); ++i) {
        data.x[i] = (profile.freq_at(i) - profile.start_hz) / span;
        data.y[i] = profile.depth[i] / depth_scale;
    }

    std::vector<double> init;
    for (std::size_t idx : maxima) {
        init.push_back(profile.depth[idx] / depth_scale);
        init.push_back((profile.freq_at(idx) - profile.start_hz) / span);
        init.push_back(estimate_fwhm(profile, idx) / span);
    }

    gsl_multifit_nlinear_fdf fdf{};
    fdf.f = residual_f;
    fdf.df = residual_df;
    fdf.n = profile.size();
    fdf.p = static_cast<std::size_t>(3 * n_peaks);
    fdf.params = &data;

    const gsl_multifit_nlinear_type* type = gsl_multifit_nlinear_trust;
    gsl_multifit_nlinear_parameters params = gsl_multifit_nlinear_default_parameters();
    std::unique_ptr<gsl_multifit_nlinear_workspace, decltype(&gsl_multifit_nlinear_free)> work(
        gsl_multifit_nlinear_alloc(type, &params, fdf.n, fdf.p), gsl_multifit_nlinear_free);
    if (!work) throw NumericError("fit_peaks: workspace allocation failed");

    gsl_vector_view x0 = gsl_vector_view_array(init.data(), fdf.p);
    gsl_multifit_nlinear_init(&x0.vector, &fdf, work.get());

    int info = 0;
    const int status = gsl_multifit_nlinear_driver(400, 1e-10, 1e-10, 1e-10, record_chisq,
                                                   &data, &info, work.get());
    if (status != GSL_SUCCESS && status != GSL_EMAXITER && status != GSL_ENOPROG)
        throw NumericError("fit_peaks: optimizer failed");
    const gsl_vector* x = gsl_multifit_nlinear_position(work.get());
    const gsl_vector* f = gsl_multifit_nlinear_residual(work.get());
    double chisq = 0.0;
    gsl_blas_ddot(f, f, &chisq);
    // A stall with a tiny residual is an exact fit, not a failure.
    if (status != GSL_SUCCESS && chisq > 1e-8 * static_cast<double>(fdf.n))
        throw NumericError("fit_peaks: did not converge within the iteration budget");

    result.residual_norm = std::sqrt(chisq) * depth_scale;
    result.iterations = static_cast<int>(gsl_multifit_nlinear_niter(work.get()));

    // Parameter uncertainties from the residual covariance.
    gsl_matrix* jac = gsl_multifit_nlinear_jac(work.get());
    std::unique_ptr<gsl_matrix, decltype(&gsl_matrix_free)> covar(
        gsl_matrix_alloc(fdf.p, fdf.p), gsl_matrix_free);
    gsl_multifit_nlinear_covar(jac, 0.0, covar.get());
    const double dof = static_cast<double>(fdf.n) - static_cast<double>(fdf.p);
    const double sigma2 = dof > 0.0 ? chisq / dof : 0.0;

    for (int j = 0; j < n_peaks; ++j) {
        PeakFit peak;
        peak.amplitude = gsl_vector_get(x, 3 * j) * depth_scale;
        peak.center_hz = gsl_vector_get(x, 3 * j + 1) * span + profile.start_hz;
        peak.fwhm_hz = std::abs(gsl_vector_get(x, 3 * j + 2)) * span;
        peak.amplitude_err =
            std::sqrt(sigma2 * gsl_matrix_get(covar.get(), 3 * j, 3 * j)) * depth_scale;
        peak.center_err_hz =
            std::sqrt(sigma2 * gsl_matrix_get(covar.get(), 3 * j + 1, 3 * j + 1)) * span;
        peak.fwhm_err_hz =
            std::sqrt(sigma2 * gsl_matrix_get(covar.get(), 3 * j + 2, 3 * j + 2)) * span;
        if (!(peak.amplitude > 0.0) || !std::isfinite(peak.center_hz) || !(peak.fwhm_hz > 0.0))
            throw NumericError("fit_peaks: fit collapsed to a non-physical peak");
        result.peaks.push_back(peak);
    }
    std::sort(result.peaks.begin(), result.peaks.end(),
              [](const PeakFit& a, const PeakFit& b) { return a.center_hz < b.center_hz; });
    for (std::size_t j = 0; j + 1 < result.peaks.size(); ++j) {
        const auto& a = result.peaks[j];
        const auto& b = result.peaks[j + 1];
        if (b.center_hz - a.center_hz < 0.5 * std::min(a.fwhm_hz, b.fwhm_hz))
            throw NumericError("fit_peaks: degenerate fit (peaks closer than FWHM/2)");
    }
    return result;
}

}  // namespace afc::readout
