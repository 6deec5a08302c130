#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "gkpsim/io.hpp"

using namespace gkpsim;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(bool(f));
    return std::string(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) : path("/tmp/gkpsim_test_" + name) {}
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("double formatting round trips") {
    for (double v : {0.0, 1.0, -1.0, 0.1, 1.0 / 3.0, 6.626e-34, 1e300, -2.5e-8, M_PI}) {
        const std::string s = format_double(v);
        CHECK(std::stod(s) == v);
        // no locale surprises
        CHECK(s.find(',') == std::string::npos);
    }
}

TEST_CASE("csv bytes are deterministic") {
    TempFile tmp("rows.csv");
    write_csv(tmp.path, {"a", "b"}, {{"1", "x"}, {"2", "y"}});
    CHECK(slurp(tmp.path) == "a,b\n1,x\n2,y\n");
}

TEST_CASE("sha256") {
    TempFile tmp("empty.bin");
    { std::ofstream f(tmp.path, std::ios::binary); }
    CHECK(sha256_file(tmp.path) ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");

    TempFile tmp2("abc.bin");
    { std::ofstream f(tmp2.path, std::ios::binary); f << "abc"; }
    CHECK(sha256_file(tmp2.path) ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("circuit json round trip") {
    EcdCircuitParams p;
    p.depth = 2;
    p.beta = {cx(0.25, -1.5), cx(-0.75, 0.0)};
    p.phi = {0.5, -2.25};
    p.theta = {1.0, 0.125};
    TempFile tmp("circuit.json");
    save_circuit_json(tmp.path, p, 0.9875);
    EcdCircuitParams q = load_circuit_json(tmp.path);
    CHECK(q.depth == 2);
    for (int k = 0; k < 2; ++k) {
        CHECK(q.beta[k] == p.beta[k]);
        CHECK(q.phi[k] == p.phi[k]);
        CHECK(q.theta[k] == p.theta[k]);
    }
}

TEST_CASE("schedule json lists every step") {
    HilbertSpace sp{20};
    CircuitSchedule sch{sp, {}};
    sch.append(CircuitStep::rotate(-M_PI / 2.0, M_PI / 2.0));
    sch.append(CircuitStep::ecd(cx(0.1, -0.2)));
    sch.append(CircuitStep::frame(M_PI / 2.0));
    const std::string j = schedule_to_json(sch);
    CHECK(j.find("rotate") != std::string::npos);
    CHECK(j.find("ecd") != std::string::npos);
    CHECK(j.find("frame") != std::string::npos);
    nlohmann::json parsed = nlohmann::json::parse(j);
    CHECK(parsed["cavity_dim"] == 20);
    CHECK(parsed["steps"].size() == 3);
    CHECK(parsed["steps"][1]["beta_im"] == -0.2);
}

TEST_CASE("exporters") {
    TempFile tmp("sweep.csv");
    export_sweep_csv(tmp.path, {{0.3, "X", 0.98}, {0.3, "Z", 0.97}});
    const std::string body = slurp(tmp.path);
    CHECK(body.substr(0, body.find('\n')) == "delta,basis,fidelity");
    CHECK(body.find("0.98") != std::string::npos);

    TempFile tmp2("grid.csv");
    PhaseSpaceGrid g;
    g.kind = PhaseSpaceGrid::Kind::CfReal;
    g.re_axis = {0.0, 0.5};
    g.im_axis = {0.0};
    g.values.resize(2, 1);
    g.values << 1.0, 0.25;
    export_grid_csv(tmp2.path, g);
    CHECK(slurp(tmp2.path) == "re,im,cf_real\n0,0,1\n0.5,0,0.25\n");

    TempFile tmp3("life.csv");
    LifetimeCurve c;
    c.basis_label = "Z_0";
    c.rounds = {4};
    c.survival = {0.875};
    c.t_us = {28.0};
    export_lifetime_csv(tmp3.path, {c});
    CHECK(slurp(tmp3.path) == "state,rounds,t_us,survival\nZ_0,4,28,0.875\n");
}

TEST_CASE("manifest") {
    TempFile tmp("manifest.json");
    write_manifest(tmp.path, "memory", {{"d", "2"}, {"delta", "0.3"}}, 12.5);
    nlohmann::json j = nlohmann::json::parse(slurp(tmp.path));
    CHECK(j["command"] == "memory");
    CHECK(j["config"]["d"] == "2");
    CHECK(j["config"]["delta"] == "0.3");
    CHECK(j.contains("wall_seconds"));
}
