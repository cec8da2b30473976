#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path work_dir() {
    static const fs::path dir = [] {
        const fs::path d = fs::temp_directory_path() / ("loewner_cli_" + std::to_string(::getpid()));
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

Result run(const std::string& args) {
    const fs::path out = work_dir() / "stdout.txt";
    const fs::path err = work_dir() / "stderr.txt";
    const std::string cmd = std::string(LOEWNER_CLI) + " " + args + " > " + out.string() + " 2> " + err.string();
    const int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) out.push_back(line);
    return out;
}

std::vector<double> fields(const std::string& line) {
    std::vector<double> out;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    return out;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("trace of the constant driver") {
    const Result r = run("trace --driver const:a=0 --T 1 --steps 1000");
    CHECK(r.code == 0);
    const auto rows = lines(r.out);
    REQUIRE(rows.size() == 1002);
    CHECK(rows.front() == "t,re,im");
    const auto last = fields(rows.back());
    CHECK(last[0] == 1.0);
    CHECK(std::abs(last[1]) < 1e-9);
    CHECK(std::abs(last[2] - 2.0) < 1e-3);
}

TEST_CASE("shorter horizons restrict the driver") {
    const Result r = run("trace --driver const:a=3 --T 0.25 --steps 100");
    CHECK(r.code == 0);
    const auto last = fields(lines(r.out).back());
    CHECK(last[0] == 0.25);
    CHECK(std::abs(last[2] - 1.0) < 1e-6);
    CHECK(run("trace --driver const:a=3 --T 2").code == 2);
}

TEST_CASE("capture check") {
    const Result r = run("check --name capture --k 5");
    CHECK(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    REQUIRE(j.size() == 1);
    CHECK(j[0]["check"] == "capture");
    CHECK(j[0]["pass"] == true);
    CHECK(std::abs(j[0]["measured"]["left_endpoint"].get<double>() - 1.0) < 1e-3);
}

TEST_CASE("angle check defaults resolve the terminal approach") {
    const Result r = run("check --name angle --a 4");
    CHECK(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j[0]["measured"]["angle"].get<double>() < 0.1);
    CHECK(j[0]["solver_metadata"]["n_steps"] == 10000.0);
}

TEST_CASE("failing checks exit with 1") {
    const Result r = run("check --name hypotheses --a 2");
    CHECK(r.code == 1);
    CHECK(nlohmann::json::parse(r.out)[0]["pass"] == false);
}

TEST_CASE("curvature table") {
    const Result r = run("curvature --driver sqrt:k=5,T=1 --samples 10");
    CHECK(r.code == 0);
    const auto rows = lines(r.out);
    REQUIRE(rows.size() == 11);
    CHECK(rows[0] == "t,LC");
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(std::abs(fields(rows[i])[1] - 12.5) < 1e-9);
}

TEST_CASE("help enumerates families and checks") {
    const Result r = run("--help");
    CHECK(r.code == 0);
    for (const char* word : {"const:", "linear:", "sqrt:", "power:", "weier:", "notrace:", "timechange:", "capture",
                             "height", "tangential", "simple", "comparison", "hypotheses", "angle"}) {
        CHECK(r.out.find(word) != std::string::npos);
    }
}

TEST_CASE("input errors exit with 2 and report json") {
    const Result bad = run("trace --driver 'sqrt:k=5,q=1'");
    CHECK(bad.code == 2);
    const auto j = nlohmann::json::parse(bad.err);
    CHECK(j["error"] == "parse");
    CHECK(j["position"] == 9);

    CHECK(run("trace").code == 2);
    CHECK(run("trace --driver const:a=0 --steps 0").code == 2);
    CHECK(run("frobnicate").code == 2);
    CHECK(run("hull --driver sqrt:k=4 --window 1,2,3").code == 2);
    CHECK(run("check --name nonsense").code == 2);
    CHECK(run("subordinate --alpha 0.7").code == 2);
    CHECK(nlohmann::json::parse(run("subordinate --alpha 0.7").err)["error"] == "input");
}

TEST_CASE("numerical failures exit with 3") {
    const Result r = run("trace --driver linear:m=1e308 --steps 10");
    CHECK(r.code == 3);
    CHECK(nlohmann::json::parse(r.err)["error"] == "numerical");
}

TEST_CASE("output directories and reproducibility") {
    const fs::path a = work_dir() / "a";
    const fs::path b = work_dir() / "b";
    for (const auto& d : {a, b}) {
        CHECK(run("trace --driver sqrt:k=3 --steps 200 --svg --out " + d.string()).code == 0);
        CHECK(run("hull --driver sqrt:k=4 --window 0,5,0,2 --res 30,12 --svg --out " + d.string()).code == 0);
        CHECK(run("subordinate --alpha 0.7 --seed 42 --n 512 --out " + d.string()).code == 0);
    }
    for (const char* f : {"trace.csv", "trace.svg", "hull.json", "hull.svg", "subordinator_S.csv", "subordinator_E.csv"}) {
        CAPTURE(f);
        REQUIRE(fs::exists(a / f));
        CHECK(slurp(a / f) == slurp(b / f));
    }
    const auto hull = nlohmann::json::parse(slurp(a / "hull.json"));
    CHECK(hull["members"].get<int>() > 0);
    CHECK(lines(slurp(a / "subordinator_E.csv"))[0] == "t,E");
}

TEST_CASE("named outputs") {
    const fs::path d = work_dir() / "named";
    CHECK(run("curvature --driver power:a=4,r=0.3333333333333333 --samples 4 --name lc --out " + d.string()).code == 0);
    const auto rows = lines(slurp(d / "lc.csv"));
    REQUIRE(rows.size() == 5);
    CHECK(std::abs(fields(rows[1])[1] - 8.0 / 3.0) < 1e-9);
}

TEST_CASE("sweep over k") {
    const fs::path d = work_dir() / "sweep";
    const Result r = run("sweep --name capture --ks 4,5 --jobs 2 --out " + d.string());
    CHECK(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    REQUIRE(j.size() == 2);
    CHECK(j[0]["params"]["k"] == 4.0);
    CHECK(j[1]["params"]["k"] == 5.0);
    CHECK(fs::exists(d / "sweep_capture_0.json"));
    CHECK(fs::exists(d / "sweep_capture_1.json"));
    CHECK(run("sweep --name capture --name height --ks 4").code == 2);
}

TEST_CASE("sweep over a and r") {
    const Result r = run("sweep --name hypotheses --as 3,6 --rs 0.25,0.3333333333333333");
    CHECK(r.code == 1);
    CHECK(nlohmann::json::parse(r.out).size() == 4);
}

}
