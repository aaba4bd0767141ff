#include <doctest.h>

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qspec/cli.hpp"
#include "qspec/oracle.hpp"

using namespace qspec;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("qspec_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int guarded(const std::function<int()>& fn) {
    std::ostringstream err;
    return run_guarded(fn, err);
}

const char* kVacuum = R"({"source": {"type": "constant_q", "c": 0}, "N": 6,
  "window": {"re": [-0.4, 0.4], "im": [-0.4, 0.4]}, "samples": 5, "cutoff": 1.2})";

}  // namespace

TEST_CASE("config parsing fills defaults and rejects unknown keys") {
    SpectrumRun r = parse_spectrum_config(kVacuum);
    CHECK(r.N == 6);
    CHECK(r.samples == 5);
    CHECK(r.window.re_min == -0.4);
    CHECK(r.spectrum.kernel_tol == 1e-6);
    CHECK_THROWS_AS(parse_spectrum_config(R"({"source": {"type": "constant_q"}, "sampels": 3})"), ConfigError);
    CHECK_THROWS_WITH(parse_spectrum_config(R"({"source": {"type": "constant_q", "q": 1}})"),
                      doctest::Contains("unknown key 'source.q'"));
    CHECK_THROWS_AS(parse_spectrum_config("{\"source\": "), ConfigError);
    CHECK_THROWS_AS(parse_spectrum_config(R"({"source": {"type": "constant_q"}, "N": 2.5})"), ConfigError);
    CHECK_THROWS_AS(parse_spectrum_config(R"({"source": {"type": "constant_q", "lattice": [[1, 0], [2, 0]]}})"), ConfigError);
    CHECK_THROWS_AS(parse_darboux_config(R"({"source": {"type": "constant_q"}, "samples": [{"a": 0}]})"), ConfigError);
    CHECK_THROWS_AS(parse_verify_config(R"({"N": 8, "extra": true})"), ConfigError);
    CHECK_THROWS_AS(parse_mesh_config(R"({"source": {"type": "immersion", "name": "sphere"}})"), ConfigError);
    VerifyConfig v = parse_verify_config(R"({"N": 6, "sample": [0.1, 0.2], "spectrum": {"edge_tol": 1e-5}})");
    CHECK(v.N == 6);
    CHECK(v.sample_im == 0.2);
    CHECK(v.spectrum.edge_tol == 1e-5);
}

TEST_CASE("malformed config maps to exit code 2") {
    CHECK(guarded([] { return cmd_spectrum(parse_spectrum_config("not json"), scratch("bad"), std::cout); }) == kExitConfig);
}

TEST_CASE("HoloData JSON round trip") {
    HoloData hd = constant_q(square_lattice(2 * kPi), cplx(0.3, -0.1), 5, cplx(0.01, 0.02));
    hd.qcoeffs[{1, -2}] = cplx(0.04, 0);
    HoloData back = holo_from_json(holo_to_json(hd));
    CHECK(back.N == 5);
    CHECK(back.alpha == hd.alpha);
    CHECK(back.qcoeffs == hd.qcoeffs);
}

TEST_CASE("spectrum command: CSV matches the vacuum oracle and is reproducible") {
    fs::path out = scratch("spectrum");
    SpectrumRun run = parse_spectrum_config(kVacuum);
    REQUIRE(cmd_spectrum(run, out, std::cout) == kExitOk);
    std::istringstream csv(slurp(out / "spectrum.csv"));
    std::string line;
    std::getline(csv, line);
    CHECK(line == "re_a,im_a,re_b,im_b,sigma_min,branch_id,flag");
    HomogeneousModel m{square_lattice(2 * kPi), 0, 0, std::nullopt};
    int rows = 0;
    while (std::getline(csv, line)) {
        std::stringstream ss(line);
        std::string cell;
        double v[4];
        for (double& x : v) {
            std::getline(ss, cell, ',');
            x = std::stod(cell);
        }
        OracleFiber o = vacuum_fiber(m, {v[0], v[1]}, run.cutoff, run.N + 2);
        double best = 1e300;
        for (cplx b : o.roots) best = std::min(best, std::abs(b - cplx(v[2], v[3])));
        CHECK(best < 1e-10);
        ++rows;
    }
    CHECK(rows > 0);
    const std::string first = slurp(out / "spectrum.csv") + slurp(out / "branches.json") + slurp(out / "collisions.json");
    REQUIRE(cmd_spectrum(run, out, std::cout) == kExitOk);
    CHECK(first == slurp(out / "spectrum.csv") + slurp(out / "branches.json") + slurp(out / "collisions.json"));
}

TEST_CASE("spectrum command flags the handle for constant q") {
    fs::path out = scratch("handle");
    SpectrumRun run = parse_spectrum_config(R"({"source": {"type": "constant_q", "c": 0.3},
        "window": {"re": [-0.25, 0.25], "im": [-0.25, 0.25]}, "samples": 11})");
    REQUIRE(cmd_spectrum(run, out, std::cout) == kExitOk);
    auto j = nlohmann::json::parse(slurp(out / "collisions.json"));
    bool handle = false;
    for (const auto& c : j["collisions"]) handle = handle || c["kind"] == "handle";
    CHECK(handle);
}

TEST_CASE("darboux command: meshes, Willmore, constant and paired members") {
    fs::path out = scratch("darboux");
    DarbouxRun run = parse_darboux_config(R"({
        "source": {"type": "immersion", "name": "clifford", "grid": [64, 64]},
        "samples": [{"a": [0.3, 0.1]}, {"a": [-0.2, 0.4]}, {"a": [0.5, -0.3], "root": 1}]})");
    REQUIRE(cmd_darboux(run, out, std::cout) == kExitOk);
    int meshes = 0;
    for (const auto& e : fs::directory_iterator(out)) meshes += e.path().extension() == ".obj";
    CHECK(meshes == 4);
    auto rep = nlohmann::json::parse(slurp(out / "family.json"));
    for (const auto& m : rep["members"]) {
        CHECK(m["class"] == "regular");
        CHECK(std::abs(m["willmore"].get<double>() - 2 * kPi * kPi) < 0.02 * 2 * kPi * kPi);
    }

    fs::path out2 = scratch("darboux_trivial");
    DarbouxRun triv = parse_darboux_config(R"({
        "source": {"type": "immersion", "name": "clifford", "grid": [48, 48]},
        "samples": [{"a": 0, "b": 0}], "meshes": false})");
    REQUIRE(cmd_darboux(triv, out2, std::cout) == kExitOk);
    auto rep2 = nlohmann::json::parse(slurp(out2 / "family.json"));
    CHECK(rep2["members"][0]["class"] == "constant");
}

TEST_CASE("darboux command reports rho pairs as identical") {
    ImmersionGrid g = homogeneous_torus(kPi / 4, 48, 48);
    SpectrumEngine eng(extract_holo(g).hd);
    FiberSolveResult f = eng.fiber_roots({0.3, 0.1}, 1.5);
    auto it = std::min_element(f.roots.begin(), f.roots.end(),
                               [](const FiberRoot& x, const FiberRoot& y) { return std::abs(x.b) < std::abs(y.b); });
    const HarmonicForm w{cplx(0.3, 0.1), it->b}, r = rho_conjugate(w);
    nlohmann::json cfg = {{"source", {{"type", "immersion"}, {"grid", {48, 48}}}},
                          {"samples", {{{"a", {0.3, 0.1}}, {"b", {w.b.real(), w.b.imag()}}},
                                       {{"a", {r.a.real(), r.a.imag()}}, {"b", {r.b.real(), r.b.imag()}}}}},
                          {"meshes", false}};
    fs::path out = scratch("pairs");
    REQUIRE(cmd_darboux(parse_darboux_config(cfg.dump()), out, std::cout) == kExitOk);
    auto rep = nlohmann::json::parse(slurp(out / "family.json"));
    REQUIRE(rep["rho_pairs"].size() == 1);
    CHECK(rep["rho_pairs"][0]["identical"] == true);
}

TEST_CASE("non-immersed grid maps to exit code 4") {
    GridSpec gs{square_lattice(2 * kPi), 32, 32};
    QField v(gs.size());
    for (int i = 0; i < 32; ++i)
        for (int j = 0; j < 32; ++j) v[gs.at(i, j)] = {std::cos(2 * kPi * i / 32), std::sin(2 * kPi * j / 32), 0, 0};
    fs::path dir = scratch("branch");
    {
        std::ofstream o(dir / "grid.json");
        o << grid_to_json(make_grid(gs.lat, 32, 32, v, Mat2H::identity()));
    }
    nlohmann::json cfg = {{"source", {{"type", "grid"}, {"path", (dir / "grid.json").string()}}}, {"samples", {{{"a", 0.3}}}}};
    CHECK(guarded([&] { return cmd_darboux(parse_darboux_config(cfg.dump()), dir, std::cout); }) == kExitNotImmersed);
}

TEST_CASE("export-mesh writes OBJ and grid JSON") {
    fs::path out = scratch("mesh");
    MeshRun run = parse_mesh_config(R"({"source": {"type": "immersion", "name": "homogeneous", "theta": 1.0, "grid": [16, 24]},
        "name": "torus"})");
    REQUIRE(cmd_export_mesh(run, out, std::cout) == kExitOk);
    CHECK(fs::exists(out / "torus.obj"));
    ImmersionGrid g = grid_from_json(slurp(out / "torus.json"));
    CHECK(g.nx == 16);
    CHECK(g.ny == 24);
}

TEST_CASE("verify suite with N = 2 fails the truncation check") {
    VerifyConfig cfg;
    cfg.N = 2;
    cfg.homogeneous_draws = 2;
    cfg.vacuum_random_samples = 2;
    VerifyReport rep = run_verify(cfg, false);
    auto t1 = std::find_if(rep.criteria.begin(), rep.criteria.end(), [](const CriterionResult& c) { return c.id == "T1"; });
    REQUIRE(t1 != rep.criteria.end());
    CHECK_FALSE(t1->pass);
    CHECK_FALSE(rep.all_pass);
}
