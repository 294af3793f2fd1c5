#include "afc/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <system_error>

#include "afc/errors.hpp"

namespace afc::csv {

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc())
        throw NumericError("format_double: conversion failed");
    return std::string(buf, ptr);
}

void write_rows(const std::filesystem::path& file, const std::string& header,
                const std::vector<std::vector<double>>& rows) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw ValidationError("cannot open for writing: " + file.string());
    out << header << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << format_double(row[i]);
        }
        out << '\n';
    }
    if (!out) throw NumericError("write failed: " + file.string());
}

std::vector<std::vector<double>> read_rows(const std::filesystem::path& file,
                                           const std::string& expected_header) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ValidationError("cannot open for reading: " + file.string());
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("empty CSV: " + file.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != expected_header)
        throw ValidationError("unexpected CSV header in " + file.string() + ": " + line);

    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        const char* p = line.data();
        const char* end = line.data() + line.size();
        while (p < end) {
            double v = 0.0;
            auto [next, ec] = std::from_chars(p, end, v);
            if (ec != std::errc())
                throw ValidationError("bad number in " + file.string() + ": " + line);
            row.push_back(v);
            p = next;
            if (p < end) {
                if (*p != ',') throw ValidationError("bad separator in " + file.string());
                ++p;
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_efficiency_curve(const std::filesystem::path& file, const EfficiencyCurve& curve) {
    std::vector<std::vector<double>> rows;
    rows.reserve(curve.points.size());
    for (const auto& p : curve.points) rows.push_back({p.t_s, p.eta, p.std_error});
    write_rows(file, "t_s,eta,stderr", rows);
}

EfficiencyCurve read_efficiency_curve(const std::filesystem::path& file) {
    EfficiencyCurve curve;
    for (const auto& row : read_rows(file, "t_s,eta,stderr")) {
        if (row.size() != 3) throw ValidationError("efficiency curve rows need 3 columns");
        curve.points.push_back({row[0], row[1], row[2]});
    }
    curve.validate();
    return curve;
}

void write_absorption_profile(const std::filesystem::path& file, const AbsorptionProfile& profile) {
    std::vector<std::vector<double>> rows;
    rows.reserve(profile.size());
    for (std::size_t i = 0; i < profile.size(); ++i)
        rows.push_back({profile.freq_at(i), profile.depth[i]});
    write_rows(file, "freq_hz,alphaL", rows);
}

AbsorptionProfile read_absorption_profile(const std::filesystem::path& file) {
    const auto rows = read_rows(file, "freq_hz,alphaL");
    if (rows.size() < 2) throw ValidationError("absorption profile needs at least 2 rows");
    AbsorptionProfile profile;
    profile.start_hz = rows[0][0];
    profile.step_hz = (rows.back()[0] - rows[0][0]) / static_cast<double>(rows.size() - 1);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != 2) throw ValidationError("absorption profile rows need 2 columns");
        const double expected = profile.start_hz + profile.step_hz * static_cast<double>(i);
        if (std::abs(rows[i][0] - expected) > 1e-6 * std::max(1.0, std::abs(expected)))
            throw ValidationError("absorption profile grid is not uniform");
        profile.depth.push_back(rows[i][1]);
    }
    profile.validate();
    return profile;
}

readout::DetectorResponse read_detector_table(const std::filesystem::path& file) {
    readout::DetectorResponse det;
    det.model = readout::DetectorResponse::Model::Tabulated;
    for (const auto& row : read_rows(file, "freq_hz,re,im")) {
        if (row.size() != 3) throw ValidationError("detector table rows need 3 columns");
        det.table.emplace_back(row[0], std::complex<double>(row[1], row[2]));
    }
    det.validate();
    return det;
}

}  // namespace afc::csv
