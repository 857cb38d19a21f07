#include "doctest.h"

#include "json.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path dir = fs::temp_directory_path() / "dwabm_cli_test";

int run(const std::string& args)
{
    fs::create_directories(dir);
    const std::string cmd = std::string(DWABM_CLI) + " " + args + " >/dev/null 2>&1";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p)
{
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::string out(const std::string& name) { return (dir / name).string(); }

} // namespace

TEST_CASE("analytic output")
{
    REQUIRE(run("analytic --x0 0.5 --out " + out("a.json")) == 0);
    const json j = json::parse(slurp(dir / "a.json"));
    CHECK(j["version"].get<std::string>().rfind("dwabm ", 0) == 0);
    const double lam1 = 0.5 * (5 - std::sqrt(13 + 4 * std::sqrt(5.0)));
    CHECK(std::abs(j["results"]["lambda1"].get<double>() - lam1) <= 1e-10);
    CHECK(std::abs(j["results"]["lambda1"].get<double>() - 0.157764) <= 1e-6);
    CHECK(std::abs(j["results"]["dimension_constant"].get<double>() - (3 - lam1) / 2) <= 1e-12);
    CHECK(j["results"].contains("alpha4"));
    CHECK(j["results"].contains("c4_re"));
    CHECK(j["results"].contains("E(0.5)"));
    REQUIRE(j["checks"].size() == 5);
    for (const auto& c : j["checks"]) CHECK(c["pass"].get<bool>());
}

TEST_CASE("runs are reproducible byte for byte")
{
    const std::string args = "gambler --x0 0.5 --trials 300 --seed 7 --out ";
    REQUIRE(run(args + out("g1.json")) == 0);
    REQUIRE(run(args + out("g2.json")) == 0);
    REQUIRE(run(args + out("g3.json") + " --threads 3") == 0);
    const std::string g1 = slurp(dir / "g1.json");
    CHECK(g1 == slurp(dir / "g2.json"));
    CHECK(g1 == slurp(dir / "g3.json"));
    CHECK(g1.find("wall") == std::string::npos);

    // the embedded command reproduces the file
    const json j = json::parse(g1);
    const std::string cmd = j["command"];
    REQUIRE(cmd.rfind("dwabm ", 0) == 0);
    REQUIRE(run(cmd.substr(6) + " --out " + out("g4.json")) == 0);
    CHECK(g1 == slurp(dir / "g4.json"));
    CHECK(j["config"]["seed"] == 7);
    CHECK(j["config"]["trials"] == 300);
    CHECK(j["results"]["estimates"][0]["trials"] == 300);
}

TEST_CASE("csv output and embedded config")
{
    REQUIRE(run("chain --x0 0.2 --y 0.5 --trials 20000 --seed 2 --format csv --out " + out("c.csv")) == 0);
    std::istringstream is(slurp(dir / "c.csv"));
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(is, line)) lines.push_back(line);
    REQUIRE(lines.size() == 6);
    CHECK(lines[0].rfind("# dwabm ", 0) == 0);
    REQUIRE(lines[2].rfind("# config: ", 0) == 0);
    const json cfg = json::parse(lines[2].substr(10));
    CHECK(cfg["subcommand"] == "chain");
    CHECK(cfg["y"] == 0.5);
    CHECK(lines[3].find("PASS") != std::string::npos);
    CHECK(lines[4].rfind("x,y,p_hat", 0) == 0);
    CHECK(lines[5].rfind("0.2,0.5,", 0) == 0);

    // replaying the csv command reproduces it
    const std::string cmd = lines[1].substr(std::string("# command: dwabm ").size());
    REQUIRE(run(cmd + " --out " + out("c2.csv")) == 0);
    CHECK(slurp(dir / "c.csv") == slurp(dir / "c2.csv"));
}

TEST_CASE("dimension csv: the slope is recomputable from the rows")
{
    REQUIRE(run("dimension --grid-n 1024 --q 0 --seed 3 --format csv --out " + out("d.csv")) == 0);
    std::istringstream is(slurp(dir / "d.csv"));
    std::string line;
    double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0, reported = 0;
    bool header = false;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            CHECK(line == "bubble,anchor_i,anchor_j,area,boundary,scale,count,in_fit,slope");
            header = true;
            continue;
        }
        std::vector<std::string> f;
        std::stringstream ls(line);
        for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
        REQUIRE(f.size() == 9);
        if (f[0] != "0") break;
        reported = std::stod(f[8]);
        if (f[7] != "1") continue;
        const double x = -std::log(std::stod(f[5])), y = std::log(std::stod(f[6]));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        n += 1;
    }
    REQUIRE(n >= 3);
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(std::abs(slope - reported) <= 1e-9);
    CHECK(slope > 1.0);
    CHECK(slope < 2.0);
}

TEST_CASE("exit codes")
{
    CHECK(run("gambler --x0 1.5 --trials 10") == 2);
    CHECK(run("gambler --x0 0.5 --trials 10 --format xml") == 2);
    CHECK(run("gambler --trials 10") == 2);
    CHECK(run("nosuch") == 2);
    CHECK(run("") == 2);
    CHECK(run("gambler --x0 0.5 --trials 10 --out /nonexistent/dir/x.json") == 2);
    CHECK(run("chain --x0 0.6 --y 0.5 --trials 10") == 2);
    CHECK(run("deltadw --delta 1.5 --trials 10") == 2);
    CHECK(run("robustness --v 0.5 --trials 10") == 2);
    CHECK(run("dimension --grid-n 100000") == 2);
    // every trial runs out of path budget
    CHECK(run("gambler --x0 0.1 --trials 20 --node-budget 50 --out " + out("h.json")) == 3);
    const json j = json::parse(slurp(dir / "h.json"));
    CHECK(j["results"]["estimates"][0]["flagged"] == true);
    CHECK(run("level-escape --x0 2 --y 4 --trials 20") == 0);
    CHECK(run("--help") == 0);
    CHECK(run("--version") == 0);
}
