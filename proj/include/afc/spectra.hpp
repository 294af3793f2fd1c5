#pragma once

#include "afc/types.hpp"

namespace afc::spectra {

/// Comb finesse F = spacing / peak FWHM.
double comb_finesse(const CombSpec& spec);

/// Effective absorption of a Gaussian-peak comb:
/// alphaL_eff = (alphaL / F) * sqrt(pi / (4 ln 2)).
double effective_absorption(double alpha_l, double finesse);

/// Dephasing rate of the comb envelope, gamma_t = 2 pi gamma / sqrt(8 ln 2),
/// in rad/s.
double gamma_tilde(double peak_fwhm_hz);

/// Free-space recall efficiency at storage time t:
/// eta = alphaL_eff^2 exp(-alphaL_eff) exp(-t^2 gamma_t^2), clamped to [0, 1].
double efficiency_forward(const CombSpec& spec, double t_s);

/// Recall efficiency with the comb inside an impedance-matched cavity:
/// eta = 4 aL^2 e^(-2 aL) (1-R1)^2 R2 e^(-t^2 g^2) / (1 - sqrt(R1 R2) e^(-aL))^4.
/// Throws NumericError when sqrt(R1 R2) e^(-aL) approaches 1 (divergent cavity).
double efficiency_cavity(const CombSpec& spec, const CavitySpec& cavity, double t_s);

/// Sum of M Gaussian peaks sampled on a uniform grid.  The grid must span all
/// peak centers and resolve each FWHM with at least 8 samples.
AbsorptionProfile build_comb_profile(const CombSpec& spec, double start_hz, double step_hz,
                                     std::size_t n_samples);

struct AlphaFit {
    double alpha_l = 0.0;
    double std_error = 0.0;
    double ci_low = 0.0;   // 95% interval from the residual covariance
    double ci_high = 0.0;
    bool converged = false;
    double residual_norm = 0.0;
};

/// Least-squares fit of the forward efficiency model over alphaL in (0, 200],
/// with gamma and delta held fixed.  Deterministic: a fixed coarse scan
/// brackets the minimum (ties resolved toward larger alphaL, the optically
/// thick branch) before golden-section refinement.
AlphaFit fit_alpha(const EfficiencyCurve& curve, double peak_fwhm_hz, double spacing_hz);

}  // namespace afc::spectra
