#include "afc/ensemble.hpp"

#include <cmath>

#include "afc/errors.hpp"
#include "afc/numeric.hpp"
#include "afc/rng.hpp"

namespace afc::dynamics {

void IonEnsemble::validate() const {
    comb.validate();
    const std::size_t n = detuning_hz.size();
    if (n == 0) throw ValidationError("IonEnsemble: empty");
    if (peak_index.size() != n || stark_class.size() != n || weight.size() != n ||
        spatial_phase_rad.size() != n)
        throw ValidationError("IonEnsemble: inconsistent field lengths");
    for (std::size_t i = 0; i < n; ++i) {
        if (peak_index[i] < 0 || peak_index[i] >= comb.peak_count)
            throw ValidationError("IonEnsemble: peak index out of range");
        if (stark_class[i] != 1 && stark_class[i] != -1)
            throw ValidationError("IonEnsemble: stark class must be +-1");
        if (!std::isfinite(weight[i].real()) || !std::isfinite(weight[i].imag()))
            throw ValidationError("IonEnsemble: weights must be finite");
    }
}

IonEnsemble sample_ensemble(const CombSpec& spec, std::int64_t n_ions, std::uint64_t seed) {
    spec.validate();
    if (n_ions < 2 * spec.peak_count)
        throw ValidationError("sample_ensemble: need at least 2 ions per peak");

    IonEnsemble ens;
    ens.comb = spec;
    ens.seed = seed;
    const auto n = static_cast<std::size_t>(n_ions);
    ens.peak_index.reserve(n);
    ens.detuning_hz.reserve(n);
    ens.stark_class.reserve(n);
    ens.weight.assign(n, {1.0, 0.0});
    ens.spatial_phase_rad.reserve(n);

    auto rng = make_rng(seed);
    std::normal_distribution<double> within_peak(0.0, spec.peak_fwhm_hz * kFwhmToSigma);
    std::uniform_real_distribution<double> uniform01(0.0, 1.0);
    std::uniform_real_distribution<double> phase(0.0, kTwoPi);

    // Peak occupation follows the height multipliers (absorption depth tracks
    // ion count per peak).
    std::vector<double> cumulative(static_cast<std::size_t>(spec.peak_count));
    double total = 0.0;
    for (int p = 0; p < spec.peak_count; ++p) {
        total += spec.multiplier(p);
        cumulative[static_cast<std::size_t>(p)] = total;
    }

    for (std::size_t i = 0; i < n; ++i) {
        const double u = uniform01(rng) * total;
        int peak = 0;
        while (peak + 1 < spec.peak_count && u > cumulative[static_cast<std::size_t>(peak)]) ++peak;
        ens.peak_index.push_back(peak);
        const double offset = spec.peak_center_hz(peak) - spec.center_frequency_hz;
        ens.detuning_hz.push_back(offset + within_peak(rng));
        ens.stark_class.push_back(uniform01(rng) < 0.5 ? std::int8_t{1} : std::int8_t{-1});
        ens.spatial_phase_rad.push_back(phase(rng));
    }
    return ens;
}

IonEnsemble mirrored_balanced_ensemble(const CombSpec& spec, std::int64_t n_pairs,
                                       std::uint64_t seed) {
    IonEnsemble half = sample_ensemble(spec, n_pairs, seed);
    const std::size_t n = half.size();
    IonEnsemble ens;
    ens.comb = half.comb;
    ens.seed = seed;
    ens.peak_index.reserve(2 * n);
    ens.detuning_hz.reserve(2 * n);
    ens.stark_class.reserve(2 * n);
    ens.weight.reserve(2 * n);
    ens.spatial_phase_rad.reserve(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (int cls : {1, -1}) {
            ens.peak_index.push_back(half.peak_index[i]);
            ens.detuning_hz.push_back(half.detuning_hz[i]);
            ens.stark_class.push_back(static_cast<std::int8_t>(cls));
            ens.weight.push_back(half.weight[i]);
            ens.spatial_phase_rad.push_back(half.spatial_phase_rad[i]);
        }
    }
    return ens;
}

}  // namespace afc::dynamics
