#include "hartree/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace hartree {
namespace {

enum class Kind { forward, backward, r2c, c2r, forward1, backward1 };

std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

fftw_plan get_plan(int n, Kind kind) {
    static std::map<std::pair<int, Kind>, fftw_plan> cache;
    std::lock_guard<std::mutex> lock(plan_mutex());
    auto key = std::make_pair(n, kind);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    const std::size_t full = static_cast<std::size_t>(n) * n * n;
    const std::size_t half = static_cast<std::size_t>(n) * n * (n / 2 + 1);
    fftw_plan p = nullptr;
    const unsigned flags = FFTW_ESTIMATE;
    if (kind == Kind::forward1 || kind == Kind::backward1) {
        auto* buf = fftw_alloc_complex(n);
        p = fftw_plan_dft_1d(n, buf, buf, kind == Kind::forward1 ? FFTW_FORWARD : FFTW_BACKWARD, flags);
        fftw_free(buf);
    } else if (kind == Kind::forward || kind == Kind::backward) {
        auto* buf = fftw_alloc_complex(full);
        p = fftw_plan_dft_3d(n, n, n, buf, buf, kind == Kind::forward ? FFTW_FORWARD : FFTW_BACKWARD, flags);
        fftw_free(buf);
    } else {
        auto* r = fftw_alloc_real(full);
        auto* c = fftw_alloc_complex(half);
        if (kind == Kind::r2c)
            p = fftw_plan_dft_r2c_3d(n, n, n, r, c, flags);
        else
            p = fftw_plan_dft_c2r_3d(n, n, n, c, r, flags);
        fftw_free(r);
        fftw_free(c);
    }
    cache.emplace(key, p);
    return p;
}

fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

} // namespace

void fft_forward(const Grid& g, cplx* data) {
    fftw_execute_dft(get_plan(g.n(), Kind::forward), as_fftw(data), as_fftw(data));
}

void fft_inverse(const Grid& g, cplx* data) {
    fftw_execute_dft(get_plan(g.n(), Kind::backward), as_fftw(data), as_fftw(data));
    const double s = 1.0 / static_cast<double>(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) data[i] *= s;
}

void fft1_forward(const Grid& g, cplx* data) {
    fftw_execute_dft(get_plan(g.n(), Kind::forward1), as_fftw(data), as_fftw(data));
}

void fft1_inverse(const Grid& g, cplx* data) {
    fftw_execute_dft(get_plan(g.n(), Kind::backward1), as_fftw(data), as_fftw(data));
    const double s = 1.0 / g.n();
    for (int i = 0; i < g.n(); ++i) data[i] *= s;
}

std::size_t half_spectrum_size(const Grid& g) {
    return static_cast<std::size_t>(g.n()) * g.n() * (g.n() / 2 + 1);
}

void rfft_forward(const Grid& g, const double* in, cplx* out) {
    fftw_execute_dft_r2c(get_plan(g.n(), Kind::r2c), const_cast<double*>(in), as_fftw(out));
}

void rfft_inverse(const Grid& g, cplx* in, double* out) {
    fftw_execute_dft_c2r(get_plan(g.n(), Kind::c2r), as_fftw(in), out);
    const double s = 1.0 / static_cast<double>(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) out[i] *= s;
}

} // namespace hartree
