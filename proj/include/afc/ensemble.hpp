#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "afc/types.hpp"

namespace afc::dynamics {

/// Microscopic sample of comb ions.  Detunings are relative to the comb
/// center (the common center frequency is a global phase in forward
/// emission).  Immutable after sampling; safe to share across threads.
struct IonEnsemble {
    CombSpec comb;
    std::uint64_t seed = 0;
    std::vector<std::int32_t> peak_index;
    std::vector<double> detuning_hz;        // peak offset + within-peak detuning
    std::vector<std::int8_t> stark_class;   // +1 or -1
    std::vector<std::complex<double>> weight;
    std::vector<double> spatial_phase_rad;  // k*z, common mode in forward emission

    std::size_t size() const { return detuning_hz.size(); }
    void validate() const;
};

/// Reproducible ensemble draw: peaks weighted by height multipliers,
/// Gaussian within-peak detunings of FWHM gamma, Stark classes +-1 with
/// probability 1/2 each, spatial phases uniform in [0, 2 pi).
IonEnsemble sample_ensemble(const CombSpec& spec, std::int64_t n_ions, std::uint64_t seed);

/// Exactly class-balanced ensemble: every sampled ion is paired with a twin
/// of equal detuning and opposite Stark class, so a lone +-pi/2 pulse cancels
/// the emission identically.
IonEnsemble mirrored_balanced_ensemble(const CombSpec& spec, std::int64_t n_pairs,
                                       std::uint64_t seed);

}  // namespace afc::dynamics
