#include "hartree/spectral.hpp"
#include "hartree/errors.hpp"
#include "hartree/fft.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

namespace hartree {

double wavenumber_sq(const Grid& g, std::size_t idx) {
    const int n = g.n();
    const int ix = static_cast<int>(idx % n);
    const int iy = static_cast<int>((idx / n) % n);
    const int iz = static_cast<int>(idx / (static_cast<std::size_t>(n) * n));
    return g.k(ix) * g.k(ix) + g.k(iy) * g.k(iy) + g.k(iz) * g.k(iz);
}

Field Multiplier::apply(const Field& u) const {
    if (u.grid() != grid) throw InvalidField("multiplier: grid mismatch");
    Field r = u;
    fft_forward(grid, r.data());
    apply_spectral(r.data());
    fft_inverse(grid, r.data());
    return r;
}

void Multiplier::apply_spectral(cplx* s) const {
    for (std::size_t i = 0; i < symbol.size(); ++i) s[i] *= symbol[i];
}

Multiplier make_multiplier(const Grid& g, const std::function<double(double, double, double)>& fn) {
    Multiplier m{g, RVec(g.size())};
    const int n = g.n();
    std::size_t idx = 0;
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix) m.symbol[idx++] = fn(g.k(ix), g.k(iy), g.k(iz));
    return m;
}

std::shared_ptr<const Multiplier> kinetic_multiplier(const Grid& g, double m) {
    static std::mutex mtx;
    static std::map<std::tuple<int, double, double>, std::shared_ptr<const Multiplier>> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto key = std::make_tuple(g.n(), g.length(), m);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto mult = std::make_shared<Multiplier>(make_multiplier(g, [m](double a, double b, double c) {
        const double k2 = a * a + b * b + c * c;
        // sqrt(k2+m2)-m without cancellation at small k
        return k2 / (std::sqrt(k2 + m * m) + m);
    }));
    cache.emplace(key, mult);
    return mult;
}

Multiplier boost_multiplier(const Grid& g, const Vec3& v) {
    Multiplier m{g, RVec(g.size())};
    const int n = g.n();
    std::size_t idx = 0;
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix)
                m.symbol[idx++] = -(v[0] * g.k_odd(ix) + v[1] * g.k_odd(iy) + v[2] * g.k_odd(iz));
    return m;
}

Field apply_kinetic(const Field& u, double m) {
    if (!(m > 0.0)) throw ParameterDomain("apply_kinetic: mass must be positive");
    u.require_finite("apply_kinetic");
    return kinetic_multiplier(u.grid(), m)->apply(u);
}

Field apply_boost(const Field& u, const Vec3& v) {
    const double s = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    if (!(s < 1.0)) throw ParameterDomain("apply_boost: |v| must be below 1");
    u.require_finite("apply_boost");
    return boost_multiplier(u.grid(), v).apply(u);
}

Field derivative(const Field& u, int axis) {
    const Grid& g = u.grid();
    const int n = g.n();
    Field r = u;
    fft_forward(g, r.data());
    std::size_t idx = 0;
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix, ++idx) {
                const int i = axis == 0 ? ix : axis == 1 ? iy : iz;
                r[idx] *= cplx(0.0, g.k_odd(i));
            }
    fft_inverse(g, r.data());
    return r;
}

std::array<Field, 3> gradient(const Field& u) {
    return {derivative(u, 0), derivative(u, 1), derivative(u, 2)};
}

RVec derivative(const Grid& g, const RVec& f, int axis) {
    Field u(g);
    for (std::size_t i = 0; i < f.size(); ++i) u[i] = f[i];
    Field d = derivative(u, axis);
    RVec r(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) r[i] = d[i].real();
    return r;
}

namespace {

// Phase for a shift along one axis; the unpaired Nyquist bin is dropped so
// the shift is unitary on band-limited fields.
std::vector<cplx> axis_phase(const Grid& g, double shift) {
    std::vector<cplx> p(g.n());
    for (int i = 0; i < g.n(); ++i) {
        if (i == g.n() / 2)
            p[i] = 0.0;
        else
            p[i] = std::polar(1.0, -g.k(i) * shift);
    }
    return p;
}

} // namespace

Field translate(const Field& u, const Vec3& shift) {
    const Grid& g = u.grid();
    const int n = g.n();
    auto px = axis_phase(g, shift[0]);
    auto py = axis_phase(g, shift[1]);
    auto pz = axis_phase(g, shift[2]);
    Field r = u;
    fft_forward(g, r.data());
    std::size_t idx = 0;
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy) {
            const cplx pyz = py[iy] * pz[iz];
            for (int ix = 0; ix < n; ++ix) r[idx++] *= px[ix] * pyz;
        }
    fft_inverse(g, r.data());
    return r;
}

RVec translate(const Grid& g, const RVec& f, const Vec3& shift) {
    Field u(g);
    for (std::size_t i = 0; i < f.size(); ++i) u[i] = f[i];
    Field t = translate(u, shift);
    RVec r(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) r[i] = t[i].real();
    return r;
}

double HartreeKernel::symbol(double k2, double radius) {
    if (k2 == 0.0) return 2.0 * std::numbers::pi * radius * radius;
    const double k = std::sqrt(k2);
    // 1 - cos(kR) = 2 sin^2(kR/2), avoiding cancellation for small kR
    const double s = std::sin(0.5 * k * radius);
    return 8.0 * std::numbers::pi * s * s / k2;
}

HartreeKernel::HartreeKernel(const Grid& g)
    : grid_(g), radius_(0.5 * g.length()), half_symbol_(half_spectrum_size(g)) {
    const int n = g.n();
    const int nh = n / 2 + 1;
    std::size_t idx = 0;
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < nh; ++ix) {
                const double k2 = g.k(ix) * g.k(ix) + g.k(iy) * g.k(iy) + g.k(iz) * g.k(iz);
                half_symbol_[idx++] = symbol(k2, radius_);
            }
}

RVec HartreeKernel::apply(const RVec& rho) const {
    if (rho.size() != grid_.size()) throw InvalidField("hartree_potential: density size mismatch");
    CVec spec(half_spectrum_size(grid_));
    rfft_forward(grid_, rho.data(), spec.data());
    for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= half_symbol_[i];
    RVec out(grid_.size());
    rfft_inverse(grid_, spec.data(), out.data());
    return out;
}

std::shared_ptr<const HartreeKernel> hartree_kernel(const Grid& g) {
    static std::mutex mtx;
    static std::map<std::pair<int, double>, std::shared_ptr<const HartreeKernel>> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto key = std::make_pair(g.n(), g.length());
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto k = std::make_shared<HartreeKernel>(g);
    cache.emplace(key, k);
    return k;
}

RVec hartree_potential(const Grid& g, const RVec& rho) {
    for (double x : rho)
        if (!std::isfinite(x)) throw InvalidField("hartree_potential: non-finite density");
    return hartree_kernel(g)->apply(rho);
}

void project_band(Field& u) {
    const Grid& g = u.grid();
    const int n = g.n(), h = n / 2;
    fft_forward(g, u.data());
    std::size_t idx = 0;
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix, ++idx)
                if (ix == h || iy == h || iz == h) u[idx] = 0.0;
    fft_inverse(g, u.data());
}

Field band_limited(const Field& u) {
    Field r = u;
    project_band(r);
    return r;
}

namespace {
constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
}

Dealiaser::Dealiaser(const Grid& coarse)
    : coarse_(coarse), fine_(2 * coarse.n(), coarse.length()), fine_of_coarse_(coarse.size(), npos) {
    const int n = coarse.n(), nf = 2 * n;
    auto fbin = [&](int i) { return i < n / 2 ? i : i + n; };
    std::size_t idx = 0;
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix, ++idx) {
                if (ix == n / 2 || iy == n / 2 || iz == n / 2) continue;
                fine_of_coarse_[idx] = static_cast<std::size_t>(fbin(ix)) +
                                       static_cast<std::size_t>(nf) * (fbin(iy) + static_cast<std::size_t>(nf) * fbin(iz));
            }
}

CVec Dealiaser::upsample_spectrum(const cplx* s) const {
    CVec f(fine_.size(), cplx(0.0, 0.0));
    for (std::size_t i = 0; i < coarse_.size(); ++i)
        if (fine_of_coarse_[i] != npos) f[fine_of_coarse_[i]] = 8.0 * s[i];
    fft_inverse(fine_, f.data());
    return f;
}

CVec Dealiaser::upsample(const Field& u) const {
    if (u.grid() != coarse_) throw InvalidField("dealiaser: grid mismatch");
    CVec s = u.values();
    fft_forward(coarse_, s.data());
    return upsample_spectrum(s.data());
}

RVec Dealiaser::upsample(const RVec& f) const {
    Field u(coarse_);
    for (std::size_t i = 0; i < f.size(); ++i) u[i] = f[i];
    CVec v = upsample(u);
    RVec r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) r[i] = v[i].real();
    return r;
}

void Dealiaser::downsample_spectrum(CVec& fv, cplx* s) const {
    fft_forward(fine_, fv.data());
    for (std::size_t i = 0; i < coarse_.size(); ++i)
        s[i] = fine_of_coarse_[i] == npos ? cplx(0.0, 0.0) : 0.125 * fv[fine_of_coarse_[i]];
}

Field Dealiaser::downsample(CVec fv) const {
    Field r(coarse_);
    downsample_spectrum(fv, r.data());
    fft_inverse(coarse_, r.data());
    return r;
}

RVec Dealiaser::potential(const RVec& rho) const { return hartree_kernel(fine_)->apply(rho); }

std::shared_ptr<const Dealiaser> dealiaser(const Grid& g) {
    static std::mutex mtx;
    static std::map<std::pair<int, double>, std::shared_ptr<const Dealiaser>> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto key = std::make_pair(g.n(), g.length());
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto d = std::make_shared<Dealiaser>(g);
    cache.emplace(key, d);
    return d;
}

CVec spectrum(const Field& u) {
    CVec s = u.values();
    fft_forward(u.grid(), s.data());
    return s;
}

double h_half_norm(const Field& u) {
    const Grid& g = u.grid();
    CVec s = spectrum(u);
    double acc = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) acc += std::sqrt(1.0 + wavenumber_sq(g, i)) * std::norm(s[i]);
    return std::sqrt(acc * g.cell_volume() / static_cast<double>(g.size()));
}

double weighted_moment(const Field& u, const Vec3& c) {
    const Grid& g = u.grid();
    const int n = g.n();
    std::vector<double> dx(n), dy(n), dz(n);
    for (int i = 0; i < n; ++i) {
        dx[i] = g.wrap(g.coord(i) - c[0]);
        dy[i] = g.wrap(g.coord(i) - c[1]);
        dz[i] = g.wrap(g.coord(i) - c[2]);
    }
    double acc = 0.0;
    std::size_t idx = 0;
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy) {
            const double r2 = dy[iy] * dy[iy] + dz[iz] * dz[iz];
            for (int ix = 0; ix < n; ++ix, ++idx) acc += std::sqrt(r2 + dx[ix] * dx[ix]) * std::norm(u[idx]);
        }
    return acc * g.cell_volume();
}

Norms norms(const Field& u, double eps, const Vec3& center) {
    Norms r;
    r.l2 = norm(u);
    r.h_half = h_half_norm(u);
    r.x_weight = std::sqrt(r.h_half * r.h_half + eps * weighted_moment(u, center));
    return r;
}

} // namespace hartree
