#include "hartree/field.hpp"
#include "hartree/errors.hpp"

#include <cmath>
#include <string>

namespace hartree {

Field::Field(const Grid& g, CVec data) : grid_(g), data_(std::move(data)) {
    if (data_.size() != g.size())
        throw InvalidField("field: data length " + std::to_string(data_.size()) + " does not match grid");
}

Field& Field::operator+=(const Field& o) {
    require_same_grid(*this, o, "field +=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
}

Field& Field::operator-=(const Field& o) {
    require_same_grid(*this, o, "field -=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
}

Field& Field::operator*=(double a) {
    for (auto& z : data_) z *= a;
    return *this;
}

Field& Field::operator*=(cplx a) {
    for (auto& z : data_) z *= a;
    return *this;
}

Field& Field::axpy(double a, const Field& x) {
    require_same_grid(*this, x, "field axpy");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += a * x.data_[i];
    return *this;
}

bool Field::all_finite() const {
    for (const auto& z : data_)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    return true;
}

void Field::require_finite(const char* where) const {
    if (!all_finite()) throw InvalidField(std::string(where) + ": non-finite field entry");
}

double Field::max_abs() const {
    double m = 0.0;
    for (const auto& z : data_) m = std::max(m, std::abs(z));
    return m;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double s, Field a) { return a *= s; }
Field operator*(cplx s, Field a) { return a *= s; }

void require_same_grid(const Field& a, const Field& b, const char* where) {
    if (a.grid() != b.grid()) throw InvalidField(std::string(where) + ": fields live on different grids");
}

double inner(const Field& u, const Field& w) {
    require_same_grid(u, w, "inner");
    const cplx* a = u.data();
    const cplx* b = w.data();
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    return s * u.grid().cell_volume();
}

double norm(const Field& u) { return std::sqrt(inner(u, u)); }

double inner(const Grid& g, const RVec& a, const RVec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s * g.cell_volume();
}

Field apply_J(const Field& u) {
    Field r(u.grid());
    for (std::size_t i = 0; i < u.size(); ++i) r[i] = cplx(u[i].imag(), -u[i].real());
    return r;
}

Field rotate_phase(const Field& u, double theta) {
    return std::polar(1.0, theta) * u;
}

RVec density(const Field& u) {
    RVec r(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) r[i] = std::norm(u[i]);
    return r;
}

RVec real_product(const Field& a, const Field& b) {
    require_same_grid(a, b, "real_product");
    RVec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    return r;
}

Field multiply(const RVec& f, const Field& u) {
    Field r(u.grid());
    for (std::size_t i = 0; i < u.size(); ++i) r[i] = f[i] * u[i];
    return r;
}

Field real_part(const Field& u) {
    Field r(u.grid());
    for (std::size_t i = 0; i < u.size(); ++i) r[i] = u[i].real();
    return r;
}

Field imag_part(const Field& u) {
    Field r(u.grid());
    for (std::size_t i = 0; i < u.size(); ++i) r[i] = cplx(0.0, u[i].imag());
    return r;
}

} // namespace hartree
