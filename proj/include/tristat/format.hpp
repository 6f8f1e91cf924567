#pragma once

#include <cmath>
#include <cstdio>
#include <string>

namespace tristat {

// Report number format: 6 significant digits, scientific below 1e-4.
// snprintf keeps the output byte-stable across runs.
inline std::string fmt6(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) return "0";
    char buf[64];
    if (std::abs(v) < 1e-4)
        std::snprintf(buf, sizeof buf, "%.5e", v);
    else
        std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// lossless round-trip formatting for data files
inline std::string fmt_exact(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace tristat
