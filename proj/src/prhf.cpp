#include "hartree/prhf.hpp"
#include "hartree/errors.hpp"
#include "hartree/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace hartree {
namespace {

static_assert(std::endian::native == std::endian::little, "PRHF writer assumes a little-endian host");

template <class T>
void put(std::string& out, T v) {
    char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    out.append(b, sizeof(T));
}

template <class T>
T get(std::istream& in, const std::string& path) {
    T v;
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw ConfigError("prhf: truncated file " + path);
    return v;
}

} // namespace

void write_prhf(const std::string& path, const Field& u, double m) {
    std::string buf;
    buf.reserve(32 + u.size() * 16);
    buf.append("PRHF", 4);
    put<std::uint32_t>(buf, 1);
    put<std::uint32_t>(buf, static_cast<std::uint32_t>(u.grid().n()));
    put<double>(buf, u.grid().length());
    put<double>(buf, m);
    for (std::size_t i = 0; i < u.size(); ++i) {
        put<double>(buf, u[i].real());
        put<double>(buf, u[i].imag());
    }
    write_file_atomic(path, buf);
}

PrhfFile read_prhf(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("prhf: cannot open " + path);
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "PRHF", 4) != 0) throw ConfigError("prhf: bad magic in " + path);
    const auto version = get<std::uint32_t>(in, path);
    if (version != 1) throw ConfigError("prhf: unsupported version in " + path);
    const auto n = get<std::uint32_t>(in, path);
    const double L = get<double>(in, path);
    const double m = get<double>(in, path);
    Grid g(static_cast<int>(n), L);
    Field u(g);
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double re = get<double>(in, path);
        const double im = get<double>(in, path);
        u[i] = cplx(re, im);
    }
    u.require_finite("read_prhf");
    return {std::move(u), m};
}

} // namespace hartree
