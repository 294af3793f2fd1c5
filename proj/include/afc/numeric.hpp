#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

namespace afc {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// sigma = FWHM * kFwhmToSigma for a Gaussian.
inline const double kFwhmToSigma = 1.0 / std::sqrt(8.0 * std::numbers::ln2);

/// Area of a unit-peak Gaussian of unit FWHM: sqrt(pi / (4 ln 2)).
inline const double kGaussAreaPerFwhm = std::sqrt(std::numbers::pi / (4.0 * std::numbers::ln2));

/// Unit-peak Gaussian parameterized by FWHM.
inline double gaussian_peak(double x, double center, double fwhm) {
    const double u = (x - center) / fwhm;
    return std::exp(-4.0 * std::numbers::ln2 * u * u);
}

/// Running integral of the unit-peak Gaussian from -inf to x.
inline double gaussian_cumulative(double x, double center, double fwhm) {
    const double sigma = fwhm * kFwhmToSigma;
    const double area = fwhm * kGaussAreaPerFwhm;
    return 0.5 * area * (1.0 + std::erf((x - center) / (sigma * std::numbers::sqrt2)));
}

struct PeakSample {
    double x = 0.0;
    double value = 0.0;
};

/// Refine the maximum of a sampled curve with a three-point parabola around
/// the largest sample in [first, last]. Indices are clamped to the data.
PeakSample refine_peak(std::span<const double> values, double x0, double dx,
                       std::size_t first, std::size_t last);

/// Largest sample (parabola-refined) of the whole sequence.
PeakSample refine_peak(std::span<const double> values, double x0, double dx);

/// Deterministic golden-section minimizer on [lo, hi].
double golden_minimize(double lo, double hi, int iterations, const std::function<double(double)>& f);

/// Indices of strict local maxima of a sampled curve.
std::vector<std::size_t> local_maxima(std::span<const double> values);

}  // namespace afc
