#pragma once

#include "hartree/field.hpp"

#include <array>
#include <vector>

namespace hartree {

// Lattice point-group element: output coordinate j reads input coordinate
// perm[j] with sign flip[j]; optionally complex conjugates.
struct LatticeSymmetry {
    std::array<int, 3> perm{0, 1, 2};
    std::array<int, 3> sign{1, 1, 1};
    bool conjugate = false;
};

Field apply_symmetry(const Field& u, const LatticeSymmetry& s);
// All 48 signed permutations.
std::vector<LatticeSymmetry> octahedral_group();
// Square symmetries of the two transverse axes combined with the
// conjugating reflection along `axis` (16 elements).
std::vector<LatticeSymmetry> axial_group(int axis);
Field group_average(const Field& u, const std::vector<LatticeSymmetry>& group);

// Coordinate axis parallel to v, or -1 if v is zero or not axis aligned.
int aligned_axis(const Vec3& v);

// Rotation by `angle` about a coordinate axis through the box center, by
// three band-limited shears.
Field rotate_about_axis(const Field& u, int axis, double angle);

struct SymmetryCertificate {
    // max over sampled angles of ||R u - u|| / ||u||
    double rotation_defect = 0.0;
    // ||S u - conj u|| / ||u|| with S the reflection along the axis
    double reflection_defect = 0.0;
};

SymmetryCertificate axial_symmetry_certificate(const Field& u, int axis);
// Rotation defect about all three axes, plus the size of the imaginary part.
SymmetryCertificate radial_symmetry_certificate(const Field& u);

} // namespace hartree
