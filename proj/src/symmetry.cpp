#include "hartree/symmetry.hpp"
#include "hartree/errors.hpp"
#include "hartree/fft.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hartree {

Field apply_symmetry(const Field& u, const LatticeSymmetry& s) {
    const Grid& g = u.grid();
    const int n = g.n();
    Field r(g);
    std::array<int, 3> out{};
    std::size_t idx = 0;
    for (out[2] = 0; out[2] < n; ++out[2])
        for (out[1] = 0; out[1] < n; ++out[1])
            for (out[0] = 0; out[0] < n; ++out[0], ++idx) {
                int src[3];
                for (int j = 0; j < 3; ++j) {
                    const int i = out[j];
                    src[s.perm[j]] = s.sign[j] > 0 ? i : g.mirror(i);
                }
                const cplx z = u[g.index(src[0], src[1], src[2])];
                r[idx] = s.conjugate ? std::conj(z) : z;
            }
    return r;
}

std::vector<LatticeSymmetry> octahedral_group() {
    std::vector<LatticeSymmetry> gr;
    std::array<int, 3> p{0, 1, 2};
    do {
        for (int m = 0; m < 8; ++m) {
            LatticeSymmetry s;
            s.perm = p;
            s.sign = {m & 1 ? -1 : 1, m & 2 ? -1 : 1, m & 4 ? -1 : 1};
            gr.push_back(s);
        }
    } while (std::next_permutation(p.begin(), p.end()));
    return gr;
}

std::vector<LatticeSymmetry> axial_group(int axis) {
    const int a = (axis + 1) % 3, b = (axis + 2) % 3;
    std::vector<LatticeSymmetry> gr;
    for (int swap = 0; swap < 2; ++swap)
        for (int m = 0; m < 8; ++m) {
            LatticeSymmetry s;
            s.perm[axis] = axis;
            s.perm[a] = swap ? b : a;
            s.perm[b] = swap ? a : b;
            s.sign[a] = m & 1 ? -1 : 1;
            s.sign[b] = m & 2 ? -1 : 1;
            s.sign[axis] = m & 4 ? -1 : 1;
            s.conjugate = (m & 4) != 0;
            gr.push_back(s);
        }
    return gr;
}

Field group_average(const Field& u, const std::vector<LatticeSymmetry>& group) {
    Field acc(u.grid());
    for (const auto& s : group) acc += apply_symmetry(u, s);
    acc *= 1.0 / static_cast<double>(group.size());
    return acc;
}

int aligned_axis(const Vec3& v) {
    int axis = -1;
    for (int j = 0; j < 3; ++j) {
        if (v[j] == 0.0) continue;
        if (axis >= 0) return -1;
        axis = j;
    }
    return axis;
}

namespace {

// Translate every line along `along` by amount * coordinate along `by`.
void shear(Field& u, int along, int by, double amount) {
    const Grid& g = u.grid();
    const int n = g.n();
    const int other = 3 - along - by;
    CVec line(n);
    std::array<std::size_t, 3> stride{1, static_cast<std::size_t>(n), static_cast<std::size_t>(n) * n};
    std::vector<cplx> phase(n);
    for (int ib = 0; ib < n; ++ib) {
        const double s = amount * g.coord(ib);
        for (int i = 0; i < n; ++i)
            phase[i] = i == n / 2 ? cplx(std::cos(g.k(i) * s), 0.0) : std::polar(1.0, -g.k(i) * s);
        for (int io = 0; io < n; ++io) {
            const std::size_t base = ib * stride[by] + io * stride[other];
            for (int i = 0; i < n; ++i) line[i] = u[base + i * stride[along]];
            fft1_forward(g, line.data());
            for (int i = 0; i < n; ++i) line[i] *= phase[i];
            fft1_inverse(g, line.data());
            for (int i = 0; i < n; ++i) u[base + i * stride[along]] = line[i];
        }
    }
}

} // namespace

Field rotate_about_axis(const Field& u, int axis, double angle) {
    const int a = (axis + 1) % 3, b = (axis + 2) % 3;
    Field r = u;
    const double t = -std::tan(0.5 * angle);
    shear(r, a, b, t);
    shear(r, b, a, std::sin(angle));
    shear(r, a, b, t);
    return r;
}

SymmetryCertificate axial_symmetry_certificate(const Field& u, int axis) {
    if (axis < 0 || axis > 2) throw ContractViolation("symmetry certificate: axis must be 0, 1 or 2");
    SymmetryCertificate c;
    const double nu = norm(u);
    if (nu == 0.0) return c;
    for (double ang : {std::numbers::pi / 7.0, std::numbers::pi / 5.0, std::numbers::pi / 3.0, 0.4 * std::numbers::pi})
        c.rotation_defect = std::max(c.rotation_defect, norm(rotate_about_axis(u, axis, ang) - u) / nu);
    LatticeSymmetry s;
    s.sign[axis] = -1;
    s.conjugate = true;
    c.reflection_defect = norm(apply_symmetry(u, s) - u) / nu;
    return c;
}

SymmetryCertificate radial_symmetry_certificate(const Field& u) {
    SymmetryCertificate c;
    const double nu = norm(u);
    if (nu == 0.0) return c;
    for (int axis = 0; axis < 3; ++axis)
        for (double ang : {std::numbers::pi / 7.0, std::numbers::pi / 5.0})
            c.rotation_defect = std::max(c.rotation_defect, norm(rotate_about_axis(u, axis, ang) - u) / nu);
    c.reflection_defect = norm(imag_part(u)) / nu;
    return c;
}

} // namespace hartree
