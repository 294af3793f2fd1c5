#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "afc/readout.hpp"
#include "afc/types.hpp"

namespace afc::csv {

/// Shortest round-trip decimal representation of a double.
std::string format_double(double value);

/// Write rows as UTF-8, LF-terminated CSV with the given one-line header.
void write_rows(const std::filesystem::path& file, const std::string& header,
                const std::vector<std::vector<double>>& rows);

/// Read a CSV written by write_rows; checks the header verbatim.
std::vector<std::vector<double>> read_rows(const std::filesystem::path& file,
                                           const std::string& expected_header);

// Spec'd formats.  Headers: "t_s,eta,stderr", "freq_hz,alphaL",
// "t_s,intensity", "bin_start_s,counts", "freq_hz,re,im".
void write_efficiency_curve(const std::filesystem::path& file, const EfficiencyCurve& curve);
EfficiencyCurve read_efficiency_curve(const std::filesystem::path& file);

void write_absorption_profile(const std::filesystem::path& file, const AbsorptionProfile& profile);
AbsorptionProfile read_absorption_profile(const std::filesystem::path& file);

/// Tabulated complex detector response ("freq_hz,re,im").
readout::DetectorResponse read_detector_table(const std::filesystem::path& file);

}  // namespace afc::csv
