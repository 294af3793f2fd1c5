#include "afc/types.hpp"

#include <cmath>
#include <string>

#include "afc/errors.hpp"

namespace afc {

void CombSpec::validate() const {
    if (peak_count < 2) throw ValidationError("CombSpec: peak_count must be >= 2");
    if (!(spacing_hz > 0.0)) throw ValidationError("CombSpec: spacing must be positive");
    if (!(peak_fwhm_hz > 0.0) || !(peak_fwhm_hz < spacing_hz))
        throw ValidationError("CombSpec: peak FWHM must satisfy 0 < gamma < spacing");
    if (!(peak_optical_depth >= 0.0) || !std::isfinite(peak_optical_depth))
        throw ValidationError("CombSpec: peak optical depth must be >= 0");
    if (!std::isfinite(center_frequency_hz))
        throw ValidationError("CombSpec: center frequency must be finite");
    if (!height_multipliers.empty()) {
        if (height_multipliers.size() != static_cast<std::size_t>(peak_count))
            throw ValidationError("CombSpec: need one height multiplier per peak");
        for (double m : height_multipliers)
            if (!(m > 0.0) || !std::isfinite(m))
                throw ValidationError("CombSpec: height multipliers must be positive");
    }
}

double CombSpec::multiplier(int peak) const {
    return height_multipliers.empty() ? 1.0 : height_multipliers[static_cast<std::size_t>(peak)];
}

double CombSpec::peak_center_hz(int peak) const {
    return center_frequency_hz +
           (static_cast<double>(peak) - 0.5 * static_cast<double>(peak_count - 1)) * spacing_hz;
}

void AbsorptionProfile::validate() const {
    if (depth.size() < 2) throw ValidationError("AbsorptionProfile: need at least 2 samples");
    if (!(step_hz > 0.0)) throw ValidationError("AbsorptionProfile: grid step must be positive");
    if (!std::isfinite(start_hz)) throw ValidationError("AbsorptionProfile: grid start must be finite");
    for (double d : depth)
        if (!(d >= 0.0) || !std::isfinite(d))
            throw ValidationError("AbsorptionProfile: samples must be finite and >= 0");
}

void CavitySpec::validate() const {
    if (!(r1 >= 0.0) || !(r1 < 1.0))
        throw ValidationError("CavitySpec: R1 must be in [0, 1)");
    if (!(r2 > 0.0) || !(r2 <= 1.0))
        throw ValidationError("CavitySpec: R2 must be in (0, 1]");
}

void EfficiencyCurve::validate() const {
    if (points.empty()) throw ValidationError("EfficiencyCurve: empty");
    for (const auto& p : points) {
        if (!(p.t_s >= 0.0)) throw ValidationError("EfficiencyCurve: storage times must be >= 0");
        if (!(p.eta >= 0.0) || !(p.eta <= 1.0))
            throw ValidationError("EfficiencyCurve: efficiencies must be in [0, 1]");
        if (!(p.std_error >= 0.0))
            throw ValidationError("EfficiencyCurve: standard errors must be >= 0");
    }
}

}  // namespace afc
