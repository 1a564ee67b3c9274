#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <sys/wait.h>

#include "gapspec/error.hpp"
#include "gapspec/io.hpp"

using namespace gapspec;
using io::json;

namespace {

struct Run {
    int status = -1;
    std::string out;
};

Run run_cli(const std::string& args) {
    const std::string cmd = std::string(GAPSPEC_CLI) + " " + args + " 2>/dev/null";
    Run r;
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
    const int st = pclose(p);
    r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "gapspec_test_io";
    std::filesystem::create_directories(dir);
    return dir / name;
}

void write(const std::filesystem::path& p, const std::string& text) {
    std::ofstream(p) << text;
}

}  // namespace

TEST_CASE("epsilon schedules") {
    const auto g = io::parse_eps("geometric:0.5:4");
    REQUIRE(g.size() == 4);
    CHECK(g[0] == 0.5);
    CHECK(g[3] == 0.0625);
    const auto h = io::parse_eps("harmonic:3");
    CHECK(h == std::vector<double>{0.5, 1.0 / 3, 0.25});
    CHECK(io::parse_eps("list:0.1,0.2") == std::vector<double>{0.1, 0.2});
    CHECK(io::parse_eps("list:").empty());
    CHECK_THROWS_AS(io::parse_eps("geometric:0.5"), ValidationError);
    CHECK_THROWS_AS(io::parse_eps("harmonic:-2"), ValidationError);
    CHECK_THROWS_AS(io::parse_eps("list:0.1,abc"), ValidationError);
    CHECK_THROWS_AS(io::parse_eps("fibonacci:3"), ValidationError);
}

TEST_CASE("set descriptors round-trip") {
    const GapSet sets[] = {GapSet::finite({{-2, -1}, {0.5, 2}}), GapSet::infinite_band(io::parse_eps("geometric:0.5:6"), {-2, 2}),
                           GapSet::cantor(io::parse_eps("harmonic:5"), {0, 1})};
    for (const auto& s : sets) {
        const json j = io::to_json(s);
        CHECK(j["schema"] == "gapspec/1");
        CHECK(j["gap_count"] == s.gap_count());
        const GapSet back = io::gapset_from_json(json::parse(j.dump()));
        CHECK(back == s);
    }
    const json shorthand = {{"kind", "cantor"}, {"outer", {-2, 2}}, {"epsilons", "geometric:0.25:3"}};
    CHECK(io::gapset_from_json(shorthand).gap_count() == 7);
    CHECK_THROWS_AS(io::gapset_from_json(json{{"kind", "spiral"}, {"outer", {0, 1}}, {"epsilons", {0.1}}}), ValidationError);
    CHECK_THROWS_AS(io::gapset_from_json(json{{"kind", "finite"}}), ValidationError);
    CHECK_THROWS_AS(io::gapset_from_json(json{{"schema", "other/2"}, {"kind", "finite"}, {"bands", {{0, 1}}}}), ValidationError);
    CHECK_THROWS_AS(io::gapset_from_json(json::array()), ValidationError);
}

TEST_CASE("measure descriptors round-trip") {
    const GapSet set = GapSet::finite({{-2, -1}, {0, 0.5}, {1, 2}});
    const ReflectionlessMeasure mu(set, std::vector<double>{-0.3, 0.75});
    const ReflectionlessMeasure back = io::measure_from_json(json::parse(io::to_json(mu).dump()));
    CHECK(std::vector<double>(back.gamma().begin(), back.gamma().end()) == std::vector<double>{-0.3, 0.75});
    json named = {{"set", io::to_json(set)}, {"gamma", "beta"}};
    CHECK(io::measure_from_json(named).gamma()[1] == 1.0);
    named["gamma"] = "middle";
    CHECK_THROWS_AS(io::measure_from_json(named), ValidationError);
    CHECK(io::measure_from_json(json{{"set", io::to_json(set)}}).gamma()[0] == doctest::Approx(-0.5));
}

TEST_CASE("doubles survive text bit-exactly") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
        const double v = u(rng) * std::pow(10.0, 40 * u(rng));
        CHECK(std::stod(io::format_double(v)) == v);
        CHECK(json::parse(json(v).dump()).get<double>() == v);
    }
}

TEST_CASE("coefficient CSV round-trip") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.1, 1.0);
    JacobiCoeffs j;
    j.index_origin = 1;
    for (int i = 0; i < 50; ++i) j.b.push_back(u(rng) - 0.5);
    for (int i = 0; i < 49; ++i) j.a.push_back(u(rng));
    std::istringstream in(io::coeffs_csv(j));
    const JacobiCoeffs back = io::read_coeffs_csv(in);
    CHECK(back.a == j.a);
    CHECK(back.b == j.b);
    CHECK(back.index_origin == 1);

    std::istringstream gap("n,a,b\n1,0.5,0\n3,,0\n");
    CHECK_THROWS_AS(io::read_coeffs_csv(gap), ValidationError);
    std::istringstream tail("n,a,b\n1,0.5,0\n2,0.5,0\n");
    CHECK_THROWS_AS(io::read_coeffs_csv(tail), ValidationError);
    std::istringstream neg("n,a,b\n1,-0.5,0\n2,,0\n");
    CHECK_THROWS_AS(io::read_coeffs_csv(neg), ValidationError);
    std::istringstream empty("n,a,b\n");
    CHECK_THROWS_AS(io::read_coeffs_csv(empty), ValidationError);
}

TEST_CASE("perturbation CSV round-trip") {
    const Perturbation d{{0.125, -0.25}, {1e-3, 0.0, -2.5}};
    std::istringstream in(io::perturbation_csv(d));
    const Perturbation back = io::read_perturbation_csv(in);
    CHECK(back.delta_a == d.delta_a);
    CHECK(back.delta_b == d.delta_b);
    std::istringstream bad("n,delta_a,delta_b\n2,0.1,0.1\n");
    CHECK_THROWS_AS(io::read_perturbation_csv(bad), ValidationError);
    std::istringstream cols("n,delta_a,delta_b\n1,0.1\n");
    CHECK_THROWS_AS(io::read_perturbation_csv(cols), ValidationError);
}

TEST_CASE("reports serialize") {
    BoundReport r;
    r.name = "thm1";
    r.lhs = 0.5;
    r.rhs = 2.0;
    r.slack = 1e-6;
    r.p = 0.75;
    r.n = 800;
    r.seed = 7;
    r.set_kind = "finite";
    finalize(r);
    const json j = io::to_json(r);
    CHECK(j["ratio"] == 0.25);
    CHECK(j["pass"] == true);
    CHECK(j["inputs"]["N"] == 800);
    r.rhs = 0.0;
    finalize(r);
    CHECK(io::to_json(r)["ratio"] == "inf");
    const std::vector<BoundReport> rs{r};
    const std::string csv = io::reports_csv(rs);
    CHECK(csv.rfind("name,lhs,rhs,ratio,pass,N,p,seed\n", 0) == 0);
    CHECK(csv.find("thm1,0.5,0,inf,false,800,0.75,7") != std::string::npos);
}

TEST_CASE("command line: set and equilibrium") {
    const Run s = run_cli("set --kind cantor --outer -2 2 --eps geometric:0.5:8");
    REQUIRE(s.status == 0);
    const json j = json::parse(s.out);
    CHECK(j["gap_count"] == 255);
    const auto path = scratch("two.json");
    write(path, R"({"kind":"finite","bands":[[-2,-1],[1,2]]})");
    const Run e = run_cli("equilibrium " + path.string());
    REQUIRE(e.status == 0);
    const json eq = json::parse(e.out);
    CHECK(eq["capacity"].get<double>() == doctest::Approx(std::sqrt(0.75)).epsilon(1e-12));
    const Run g = run_cli("green " + path.string() + " -x 0");
    REQUIRE(g.status == 0);
    CHECK(g.out.find("0.549") != std::string::npos);  // g(0) = acosh(5/3) / 2
}

TEST_CASE("command line: verify and exit codes") {
    const auto set = scratch("free.json");
    write(set, R"({"kind":"finite","bands":[[-2,2]]})");
    const auto zero = scratch("zero.csv");
    write(zero, "n,delta_a,delta_b\n1,,0\n");
    const Run k = run_cli("verify --ineq kato --set " + set.string() + " --perturb " + zero.string() + " -N 200");
    CHECK(k.status == 0);
    const json rep = json::parse(k.out);
    const json& first = rep.is_array() ? rep[0] : rep;
    CHECK(first["lhs"] == 0.0);

    CHECK(run_cli("verify --ineq thm1 --set " + set.string() + " --perturb " + zero.string() + " -p 0.3").status == 1);
    CHECK(run_cli("verify --ineq nonsense --set " + set.string()).status == 1);
    CHECK(run_cli("reproduce no_such_suite").status == 1);
    CHECK(run_cli("").status == 1);
    CHECK(run_cli("equilibrium /nonexistent/path.json").status == 1);
}
