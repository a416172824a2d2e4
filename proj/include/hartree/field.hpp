#pragma once

#include "hartree/grid.hpp"

#include <complex>
#include <cstdint>
#include <cstdlib>
#include <new>
#include <vector>

namespace hartree {

using cplx = std::complex<double>;

template <class T>
struct AlignedAllocator {
    using value_type = T;
    static constexpr std::size_t alignment = 64;
    AlignedAllocator() = default;
    template <class U>
    AlignedAllocator(const AlignedAllocator<U>&) {}
    T* allocate(std::size_t n) {
        std::size_t bytes = (n * sizeof(T) + alignment - 1) / alignment * alignment;
        void* p = std::aligned_alloc(alignment, bytes == 0 ? alignment : bytes);
        if (!p) throw std::bad_alloc();
        return static_cast<T*>(p);
    }
    void deallocate(T* p, std::size_t) { std::free(p); }
    template <class U>
    bool operator==(const AlignedAllocator<U>&) const { return true; }
    template <class U>
    bool operator!=(const AlignedAllocator<U>&) const { return false; }
};

using CVec = std::vector<cplx, AlignedAllocator<cplx>>;
using RVec = std::vector<double, AlignedAllocator<double>>;

// Complex field psi = psi1 + i psi2 on a grid. The real pair (psi1, psi2) is
// the interleaved storage of each complex entry.
class Field {
public:
    explicit Field(const Grid& g) : grid_(g), data_(g.size(), cplx(0.0, 0.0)) {}
    Field(const Grid& g, CVec data);

    const Grid& grid() const { return grid_; }
    std::size_t size() const { return data_.size(); }
    cplx* data() { return data_.data(); }
    const cplx* data() const { return data_.data(); }
    CVec& values() { return data_; }
    const CVec& values() const { return data_; }
    cplx& operator[](std::size_t i) { return data_[i]; }
    const cplx& operator[](std::size_t i) const { return data_[i]; }

    Field& operator+=(const Field& o);
    Field& operator-=(const Field& o);
    Field& operator*=(double a);
    Field& operator*=(cplx a);
    // this += a * x
    Field& axpy(double a, const Field& x);

    bool all_finite() const;
    // Throws InvalidField when any entry is NaN or infinite.
    void require_finite(const char* where) const;
    double max_abs() const;

private:
    Grid grid_;
    CVec data_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double s, Field a);
Field operator*(cplx s, Field a);

// Real pairing <u,w> = h^3 sum Re(conj(u) w), i.e. the integral of u1 w1 + u2 w2.
double inner(const Field& u, const Field& w);
double norm(const Field& u);
// Pairing of real densities with the same quadrature weight.
double inner(const Grid& g, const RVec& a, const RVec& b);

// J(z1, z2) = (z2, -z1), which is multiplication by -i.
Field apply_J(const Field& u);
// exp(-theta J) u = exp(i theta) u.
Field rotate_phase(const Field& u, double theta);
RVec density(const Field& u);
// Re(conj(a) b) pointwise.
RVec real_product(const Field& a, const Field& b);
Field multiply(const RVec& f, const Field& u);
Field real_part(const Field& u);
Field imag_part(const Field& u);

void require_same_grid(const Field& a, const Field& b, const char* where);

} // namespace hartree
