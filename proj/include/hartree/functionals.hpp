#pragma once

#include "hartree/field.hpp"
#include "hartree/spectral.hpp"

#include <memory>

namespace hartree {

struct FunctionalValues {
    double mass = 0.0;
    Vec3 momentum{0.0, 0.0, 0.0};
    double energy = 0.0;
    double action = 0.0;
};

// 1/2 ||u||^2
double mass(const Field& u);
// 1/2 <u, J grad u>, evaluated in Fourier space.
Vec3 momentum(const Field& u);
// 1/2 <u, (sqrt(-Delta+m^2)-m) u>
double kinetic_energy(const Field& u, double m);
// Cubic terms are evaluated exactly for band-limited fields (see Dealiaser);
// potentials given as grid samples are read as their band-limited
// interpolants.

// 1/2 <u, V u>
double potential_energy(const Field& u, const RVec& V);
// 1/4 <(1/|x| * |u|^2), |u|^2>, entering the energy with a minus sign.
double interaction_energy(const Field& u);
// Energy with external potential; an empty V means V = 0.
double energy(const Field& u, const RVec& V, double m);
// E = H_0 + mu N - v.P
double action(const Field& u, const Vec3& v, double mu, double m);
FunctionalValues evaluate(const Field& u, const RVec& V, const Vec3& v, double mu, double m);

// Band projection of (1/|x| * |u|^2) u.
Field nonlinear_term(const Field& u);
// Gradient of the energy: T u + V u - (1/|x| * |u|^2) u.
Field energy_gradient(const Field& u, const RVec& V, double m);
// E'(u) = (T + mu) u + i v.grad u - (1/|x| * |u|^2) u.
Field action_gradient(const Field& u, const Vec3& v, double mu, double m);

// (T + mu - v.k) as one multiplier; positive for mu above the essential
// threshold (checked by callers).
Multiplier linear_part(const Grid& g, const Vec3& v, double mu, double m);

// Matrix-free Hessian of the action at a fixed profile:
// L xi = (T+mu) xi + i v.grad xi - Phi(|p|^2) xi - 2 Phi(Re(conj(p) xi)) p.
class HessianOperator {
public:
    HessianOperator(const Field& profile, const Vec3& v, double mu, double m);
    Field apply(const Field& xi) const;
    const Field& profile() const { return profile_; }
    const Vec3& velocity() const { return v_; }
    double frequency() const { return mu_; }
    double mass_parameter() const { return m_; }

private:
    Field profile_;
    Vec3 v_;
    double mu_;
    double m_;
    Multiplier linear_;
    std::shared_ptr<const Dealiaser> dealias_;
    CVec profile_fine_;
    RVec self_potential_;
};

Field hessian_apply(const Field& profile, const Vec3& v, double mu, double m, const Field& xi);

// Quadratic-and-higher part of H_0' around a profile:
// -[Phi(|xi|^2) p + 2 Phi(Re(conj(p) xi)) xi + Phi(|xi|^2) xi].
Field nonlinear_remainder(const Field& profile, const Field& xi);

void require_subluminal(const Vec3& v, const char* where);
double speed(const Vec3& v);

} // namespace hartree
