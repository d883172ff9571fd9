#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "newton_sic/constructions.hpp"
#include "newton_sic/document.hpp"
#include "newton_sic/resistance.hpp"

using namespace newton_sic;
using nlohmann::json;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

Run cli(const std::string& args) {
    const std::string log = "cli_test_stdout.txt";
    const std::string cmd = std::string(NEWTON_SIC_CLI) + " " + args + " > " + log + " 2>cli_test_stderr.txt";
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = read_text(log);
    return r;
}

json record(const std::string& path) { return json::parse(read_text(path)); }

std::vector<std::vector<double>> csv_rows(const std::string& text) {
    std::vector<std::vector<double>> rows;
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

TEST_CASE("construct") {
    CHECK(cli("construct ua -o cli_ua.json").code == 0);
    const json ua = json::parse(read_text("cli_ua.json"));
    REQUIRE(ua["regions"].size() == 1);
    CHECK(ua["regions"][0]["generators"].size() == 2);
    CHECK(ua["regions"][0]["generators"][0]["kind"] == "linear-parabola");

    CHECK(cli("construct ub -o cli_ub.json").code == 0);
    CHECK(json::parse(read_text("cli_ub.json"))["domain"]["type"] == "reuleaux");

    const Run b = cli("construct besicovitch --n 6 --base-length 1 -o cli_b6.json");
    CHECK(b.code == 0);
    CHECK(b.out.find("|trap^n|") != std::string::npos);
    CHECK(b.out.find("|small^n|") != std::string::npos);
    CHECK(b.out.find("kappa_min") != std::string::npos);
    const json b6 = json::parse(read_text("cli_b6.json"));
    int traps = 0, flats = 0;
    for (const auto& r : b6["regions"]) {
        traps += r["kind"] == "radial-parabola";
        flats += r["kind"] == "flat";
    }
    CHECK(traps == 64);
    CHECK(flats == 1);
}

TEST_CASE("usage errors exit with 2") {
    CHECK(cli("construct besicovitch --n 0 -o cli_bad.json").code == 2);
    CHECK(cli("construct nonsense -o cli_bad.json").code == 2);
    CHECK(cli("eval").code == 2);
    CHECK(cli("frobnicate").code == 2);
    CHECK(cli("converge --n-min 5 --n-max 2").code == 2);
}

TEST_CASE("io and parse errors exit with 3") {
    CHECK(cli("eval cli_missing.json").code == 3);
    write_text("cli_garbage.json", "{not json");
    CHECK(cli("eval cli_garbage.json").code == 3);
    write_text("cli_unknown.json", R"({"schema": "newton-sic/surface", "version": 1})");
    CHECK(cli("eval cli_unknown.json").code == 3);
    CHECK(cli("construct ua -o cli_ua.json").code == 0);
    CHECK(cli("export cli_ua.json --format obj -o /nonexistent-dir/ua.obj").code == 3);
}

TEST_CASE("eval") {
    CHECK(cli("construct ua -o cli_ua.json").code == 0);
    const Run r = cli("--record cli_rec.json eval cli_ua.json");
    CHECK(r.code == 0);
    const json rec = record("cli_rec.json");
    const double value = rec["results"]["estimates"][0]["value"].get<double>();
    CHECK(std::abs(value - 0.593) <= 0.002);
    CHECK(rec["command"] == "eval");

    CHECK(cli("construct flat -o cli_flat.json").code == 0);
    CHECK(cli("eval cli_flat.json").out.find("R = 1.000000") != std::string::npos);

    // Same code path as the library call.
    CHECK(cli("construct besicovitch --n 8 -o cli_b8.json").code == 0);
    CHECK(cli("--record cli_rec8.json eval cli_b8.json").code == 0);
    const auto direct = resistance_quadrature(read_surface("cli_b8.json"));
    const json rec8 = record("cli_rec8.json");
    CHECK(rec8["results"]["estimates"][0]["value"].get<double>() == direct.value);
    CHECK(rec8["results"]["estimates"][0]["error"].get<double>() == direct.error);
}

TEST_CASE("eval is byte-identical across runs") {
    CHECK(cli("construct ub -o cli_ub.json").code == 0);
    const std::string a = cli("eval cli_ub.json --method both --seed 3 --samples 20000").out;
    const std::string b = cli("eval cli_ub.json --method both --seed 3 --samples 20000").out;
    CHECK(a == b);
    CHECK(cli("construct besicovitch --n 4 -o cli_b4a.json").code == 0);
    CHECK(cli("construct besicovitch --n 4 -o cli_b4b.json").code == 0);
    CHECK(read_text("cli_b4a.json") == read_text("cli_b4b.json"));
}

TEST_CASE("check-sic") {
    CHECK(cli("construct ua -o cli_ua.json").code == 0);
    CHECK(cli("check-sic cli_ua.json").code == 0);
    CHECK(cli("construct cone --slope 1.2 -o cli_cone.json").code == 0);
    const Run cone = cli("check-sic cli_cone.json --samples 500");
    CHECK(cone.code == 1);
    CHECK(cone.out.find("VIOLATED") != std::string::npos);
    CHECK(cli("construct besicovitch --n 6 -o cli_b6.json").code == 0);
    CHECK(cli("check-sic cli_b6.json --samples 10000 --tolerance 1e-9 --mode both").code == 0);
}

TEST_CASE("converge") {
    const Run bound = cli("converge --mode bound --n-min 1 --n-max 1000000 --csv cli_bound.csv");
    CHECK(bound.code == 0);
    const auto rows = csv_rows(read_text("cli_bound.csv"));
    REQUIRE_FALSE(rows.empty());
    CHECK(rows.back()[0] == 1e6);
    CHECK(rows.back()[4] <= 0.51);

    const Run measured = cli("converge --mode measured --n-min 2 --n-max 8 --csv cli_measured.csv");
    CHECK(measured.code == 0);
    const auto m = csv_rows(read_text("cli_measured.csv"));
    REQUIRE(m.size() == 7);
    for (std::size_t i = 0; i < m.size(); ++i) {
        CHECK(m[i][5] - m[i][6] > 0.5);
        CHECK(m[i][5] <= m[i][4] + m[i][6]);
        if (i > 0) CHECK(m[i][4] < m[i - 1][4]);
    }

    const Run over = cli("converge --mode measured --n-min 1 --n-max 4 --max-n 2 --csv cli_partial.csv");
    CHECK(over.code == 4);
    CHECK(csv_rows(read_text("cli_partial.csv")).size() == 2);
}

TEST_CASE("export") {
    CHECK(cli("construct ub -o cli_ub.json").code == 0);
    CHECK(cli("export cli_ub.json --format obj --resolution 0.05 -o cli_ub.obj").code == 0);
    CHECK(read_text("cli_ub.obj").find("\nf ") != std::string::npos);
    CHECK(cli("construct besicovitch --n 3 -o cli_b3.json").code == 0);
    CHECK(cli("export cli_b3.json --format svg -o cli_b3.svg").code == 0);
    CHECK(read_text("cli_b3.svg").find("<svg") == 0);
    CHECK(cli("export cli_ub.json --format csv --resolution 0.1 -o cli_ub.csv").code == 0);
    CHECK(read_text("cli_ub.csv").rfind("x1,x2,u\n", 0) == 0);
}

TEST_CASE("pack") {
    CHECK(cli("construct ua -o cli_ua.json").code == 0);
    CHECK(cli("construct polygon --sides 64 -o cli_disk.json").code == 0);
    const Run r = cli("--record cli_pack.json pack --source cli_ua.json --target cli_disk.json --epsilon 0.05 "
                      "-o cli_layout.json");
    CHECK(r.code == 0);
    CHECK(r.out.find("uncovered") != std::string::npos);
    const json rec = record("cli_pack.json");
    const double unc = rec["results"]["uncovered_fraction"].get<double>();
    const json& rs = rec["results"]["R_source"];
    const json& rt = rec["results"]["R_transfer"];
    CHECK(unc < 0.05);
    CHECK(rt["value"].get<double>() < rs["value"].get<double>() + 0.05 + rs["error"].get<double>() +
                                          rt["error"].get<double>());
    CHECK(json::parse(read_text("cli_layout.json"))["copies"].size() == rec["results"]["copies"]);
    read_surface("cli_layout.json.surface.json");

    CHECK(cli("--record cli_self.json pack --source cli_ua.json --target cli_ua.json --epsilon 0.5 -o cli_self_layout.json")
              .code == 0);
    CHECK(record("cli_self.json")["results"]["copies"] == 1);
    CHECK(cli("pack --source cli_ua.json --target cli_disk.json --epsilon 1.5 -o cli_x.json").code == 2);
}
