#include "afc/numeric.hpp"

#include <algorithm>

namespace afc {

PeakSample refine_peak(std::span<const double> values, double x0, double dx,
                       std::size_t first, std::size_t last) {
    last = std::min(last, values.size() - 1);
    first = std::min(first, last);
    std::size_t best = first;
    for (std::size_t i = first; i <= last; ++i)
        if (values[i] > values[best]) best = i;

    PeakSample out{x0 + dx * static_cast<double>(best), values[best]};
    if (best == 0 || best + 1 >= values.size()) return out;

    const double ym = values[best - 1], y0 = values[best], yp = values[best + 1];
    const double denom = ym - 2.0 * y0 + yp;
    if (denom < 0.0) {
        const double shift = 0.5 * (ym - yp) / denom;
        if (std::abs(shift) <= 1.0) {
            out.x += shift * dx;
            out.value = y0 - 0.25 * (ym - yp) * shift;
        }
    }
    return out;
}

PeakSample refine_peak(std::span<const double> values, double x0, double dx) {
    return refine_peak(values, x0, dx, 0, values.size() - 1);
}

double golden_minimize(double lo, double hi, int iterations, const std::function<double(double)>& f) {
    const double phi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - phi * (b - a);
    double x2 = a + phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < iterations; ++i) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        }
    }
    return f1 < f2 ? x1 : x2;
}

std::vector<std::size_t> local_maxima(std::span<const double> values) {
    std::vector<std::size_t> out;
    for (std::size_t i = 1; i + 1 < values.size(); ++i)
        if (values[i] > values[i - 1] && values[i] >= values[i + 1] && values[i] > 0.0)
            out.push_back(i);
    return out;
}

}  // namespace afc
