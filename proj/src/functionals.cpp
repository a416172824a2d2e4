#include "hartree/functionals.hpp"
#include "hartree/errors.hpp"
#include "hartree/fft.hpp"

#include <cmath>
#include <string>

namespace hartree {

double speed(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

void require_subluminal(const Vec3& v, const char* where) {
    if (!(speed(v) < 1.0)) throw ParameterDomain(std::string(where) + ": |v| must be below 1");
}

double mass(const Field& u) { return 0.5 * inner(u, u); }

Vec3 momentum(const Field& u) {
    const Grid& g = u.grid();
    const int n = g.n();
    CVec s = spectrum(u);
    Vec3 p{0.0, 0.0, 0.0};
    std::size_t idx = 0;
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix, ++idx) {
                const double a = std::norm(s[idx]);
                p[0] += g.k_odd(ix) * a;
                p[1] += g.k_odd(iy) * a;
                p[2] += g.k_odd(iz) * a;
            }
    const double w = 0.5 * g.cell_volume() / static_cast<double>(g.size());
    for (double& c : p) c *= w;
    return p;
}

double kinetic_energy(const Field& u, double m) {
    const Grid& g = u.grid();
    auto T = kinetic_multiplier(g, m);
    CVec s = spectrum(u);
    double acc = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) acc += T->symbol[i] * std::norm(s[i]);
    return 0.5 * acc * g.cell_volume() / static_cast<double>(g.size());
}

namespace {

RVec fine_density(const CVec& f) {
    RVec r(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) r[i] = std::norm(f[i]);
    return r;
}

} // namespace

double potential_energy(const Field& u, const RVec& V) {
    if (V.size() != u.size()) throw InvalidField("potential_energy: potential size mismatch");
    auto D = dealiaser(u.grid());
    const CVec uf = D->upsample(u);
    const RVec Vf = D->upsample(V);
    double acc = 0.0;
    for (std::size_t i = 0; i < uf.size(); ++i) acc += Vf[i] * std::norm(uf[i]);
    return 0.5 * acc * D->fine_cell_volume();
}

double interaction_energy(const Field& u) {
    auto D = dealiaser(u.grid());
    const CVec uf = D->upsample(u);
    const RVec rho = fine_density(uf);
    const RVec phi = D->potential(rho);
    double acc = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) acc += phi[i] * rho[i];
    return 0.25 * acc * D->fine_cell_volume();
}

Field nonlinear_term(const Field& u) {
    auto D = dealiaser(u.grid());
    CVec uf = D->upsample(u);
    const RVec phi = D->potential(fine_density(uf));
    for (std::size_t i = 0; i < uf.size(); ++i) uf[i] *= phi[i];
    return D->downsample(std::move(uf));
}

double energy(const Field& u, const RVec& V, double m) {
    double e = kinetic_energy(u, m) - interaction_energy(u);
    if (!V.empty()) e += potential_energy(u, V);
    return e;
}

double action(const Field& u, const Vec3& v, double mu, double m) {
    require_subluminal(v, "action");
    const Vec3 p = momentum(u);
    return energy(u, {}, m) + mu * mass(u) - (v[0] * p[0] + v[1] * p[1] + v[2] * p[2]);
}

FunctionalValues evaluate(const Field& u, const RVec& V, const Vec3& v, double mu, double m) {
    FunctionalValues f;
    f.mass = mass(u);
    f.momentum = momentum(u);
    const double kin = kinetic_energy(u, m);
    const double inter = interaction_energy(u);
    f.energy = kin - inter + (V.empty() ? 0.0 : potential_energy(u, V));
    f.action = kin - inter + mu * f.mass - (v[0] * f.momentum[0] + v[1] * f.momentum[1] + v[2] * f.momentum[2]);
    return f;
}

Field energy_gradient(const Field& u, const RVec& V, double m) {
    auto D = dealiaser(u.grid());
    CVec uf = D->upsample(u);
    RVec w = D->potential(fine_density(uf));
    if (!V.empty()) {
        if (V.size() != u.size()) throw InvalidField("energy_gradient: potential size mismatch");
        const RVec Vf = D->upsample(V);
        for (std::size_t i = 0; i < w.size(); ++i) w[i] -= Vf[i];
    }
    for (std::size_t i = 0; i < uf.size(); ++i) uf[i] *= w[i];
    return apply_kinetic(u, m) - D->downsample(std::move(uf));
}

Multiplier linear_part(const Grid& g, const Vec3& v, double mu, double m) {
    Multiplier L = boost_multiplier(g, v);
    auto T = kinetic_multiplier(g, m);
    for (std::size_t i = 0; i < L.symbol.size(); ++i) L.symbol[i] += T->symbol[i] + mu;
    return L;
}

Field action_gradient(const Field& u, const Vec3& v, double mu, double m) {
    require_subluminal(v, "action_gradient");
    u.require_finite("action_gradient");
    return linear_part(u.grid(), v, mu, m).apply(u) - nonlinear_term(u);
}

HessianOperator::HessianOperator(const Field& profile, const Vec3& v, double mu, double m)
    : profile_(profile), v_(v), mu_(mu), m_(m), linear_(linear_part(profile.grid(), v, mu, m)),
      dealias_(dealiaser(profile.grid())) {
    require_subluminal(v, "hessian");
    profile_fine_ = dealias_->upsample(profile_);
    self_potential_ = dealias_->potential(fine_density(profile_fine_));
}

Field HessianOperator::apply(const Field& xi) const {
    require_same_grid(profile_, xi, "hessian");
    CVec xf = dealias_->upsample(xi);
    RVec cross(xf.size());
    for (std::size_t i = 0; i < xf.size(); ++i)
        cross[i] = profile_fine_[i].real() * xf[i].real() + profile_fine_[i].imag() * xf[i].imag();
    const RVec pc = dealias_->potential(cross);
    for (std::size_t i = 0; i < xf.size(); ++i) xf[i] = self_potential_[i] * xf[i] + 2.0 * pc[i] * profile_fine_[i];
    return linear_.apply(xi) - dealias_->downsample(std::move(xf));
}

Field hessian_apply(const Field& profile, const Vec3& v, double mu, double m, const Field& xi) {
    return HessianOperator(profile, v, mu, m).apply(xi);
}

Field nonlinear_remainder(const Field& p, const Field& xi) {
    require_same_grid(p, xi, "nonlinear_remainder");
    auto D = dealiaser(p.grid());
    const CVec pf = D->upsample(p);
    CVec xf = D->upsample(xi);
    RVec cross(xf.size());
    for (std::size_t i = 0; i < xf.size(); ++i) cross[i] = pf[i].real() * xf[i].real() + pf[i].imag() * xf[i].imag();
    const RVec a = D->potential(fine_density(xf));
    const RVec b = D->potential(cross);
    CVec r(xf.size());
    for (std::size_t i = 0; i < xf.size(); ++i) r[i] = -(a[i] * pf[i] + 2.0 * b[i] * xf[i] + a[i] * xf[i]);
    return D->downsample(std::move(r));
}

} // namespace hartree
