#pragma once

#include "hartree/field.hpp"

#include <string>

namespace hartree {

// Binary field file: "PRHF", u32 version (1), u32 n, f64 L, f64 m, then n^3
// little-endian (re, im) f64 pairs, x fastest.
struct PrhfFile {
    Field field;
    double mass_parameter;
};

void write_prhf(const std::string& path, const Field& u, double m);
PrhfFile read_prhf(const std::string& path);

} // namespace hartree
