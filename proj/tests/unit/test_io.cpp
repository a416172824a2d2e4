#include "helpers.hpp"

#include "hartree/errors.hpp"
#include "hartree/evolution.hpp"
#include "hartree/io.hpp"
#include "hartree/prhf.hpp"

#include <doctest.h>

#include <cstring>
#include <filesystem>

using namespace hartree;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "hartree_unit";
    fs::create_directories(dir);
    return dir / name;
}

} // namespace

TEST_CASE("PRHF round trip is bit exact") {
    const Grid g(10, 7.5);
    const Field u = testing::random_smooth(g, 21);
    const auto path = scratch("round.prhf").string();
    write_prhf(path, u, 0.8);
    const PrhfFile f = read_prhf(path);
    CHECK(f.field.grid() == g);
    CHECK(f.mass_parameter == 0.8);
    CHECK(std::memcmp(f.field.data(), u.data(), u.size() * sizeof(cplx)) == 0);
}

TEST_CASE("PRHF layout") {
    const Grid g(8, 2.0);
    Field u(g);
    u[g.index(1, 0, 0)] = cplx(1.5, -2.0);
    const auto path = scratch("layout.prhf").string();
    write_prhf(path, u, 1.0);
    const std::string bytes = read_file(path);
    REQUIRE(bytes.size() == 4 + 4 + 4 + 8 + 8 + 512 * 16);
    CHECK(bytes.substr(0, 4) == "PRHF");
    std::uint32_t version = 0, n = 0;
    double L = 0.0, re = 0.0, im = 0.0;
    std::memcpy(&version, bytes.data() + 4, 4);
    std::memcpy(&n, bytes.data() + 8, 4);
    std::memcpy(&L, bytes.data() + 12, 8);
    std::memcpy(&re, bytes.data() + 28 + 16, 8);
    std::memcpy(&im, bytes.data() + 28 + 24, 8);
    CHECK(version == 1);
    CHECK(n == 8);
    CHECK(L == 2.0);
    CHECK(re == 1.5);
    CHECK(im == -2.0);
}

TEST_CASE("corrupt PRHF files are rejected") {
    const auto path = scratch("bad.prhf").string();
    write_file_atomic(path, "PRHX0000");
    CHECK_THROWS_AS(read_prhf(path), Error);
}

TEST_CASE("checkpoint keeps the time beside the field") {
    const Grid g(8, 6.0);
    const auto path = scratch("ck.prhf").string();
    write_checkpoint(path, testing::random_smooth(g, 3), 1.0, 0.1 + 0.2);
    CHECK(checkpoint_time(path) == 0.1 + 0.2);
}

TEST_CASE("CSV keeps the header and round-trips doubles") {
    CsvTable t({"t", "N", "H"});
    t.add_row({0.1, 1.0 / 3.0, -2.5e-17});
    CHECK_THROWS_AS(t.add_row({1.0}), ContractViolation);
    const std::string s = t.str();
    CHECK(s.substr(0, s.find('\n')) == "t,N,H");
    const std::string row = s.substr(s.find('\n') + 1);
    CHECK(std::stod(row.substr(row.find(',') + 1)) == 1.0 / 3.0);
}

TEST_CASE("JSON lines") {
    const auto path = scratch("records.jsonl").string();
    write_jsonl(path, {{{"v", 0.2}, {"mu", 0.5}}, {{"v", 0.0}, {"mu", 0.4}}});
    const auto back = read_jsonl(path);
    REQUIRE(back.size() == 2);
    CHECK(back[1]["mu"] == 0.4);
}

TEST_CASE("FNV-1a digests") {
    // published 64-bit FNV-1a test vectors
    CHECK(fingerprint("") == "cbf29ce484222325");
    CHECK(fingerprint("a") == "af63dc4c8601ec8c");
    CHECK(fingerprint("foobar") == "85944171f73967e8");
}

TEST_CASE("atomic writes leave no temporary files") {
    const fs::path dir = scratch("atomic");
    fs::create_directories(dir);
    write_file_atomic((dir / "x.txt").string(), "one");
    write_file_atomic((dir / "x.txt").string(), "two");
    CHECK(read_file((dir / "x.txt").string()) == "two");
    int count = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++count;
    CHECK(count == 1);
}
