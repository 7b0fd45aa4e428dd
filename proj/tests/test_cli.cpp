#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

int run(const std::string& cmd) {
    int status = std::system(cmd.c_str());
    if (status == -1) return -1;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -2;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("otmorph_cli_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

// ASCII PGM of a gaussian bump on an n x n pixel grid.
void write_bump_pgm(const std::string& path, int n, double cx, double cy) {
    std::ofstream out(path);
    out << "P2\n" << n << " " << n << "\n255\n";
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            double x = double(i) / (n - 1), y = double(j) / (n - 1);
            double g = 0.15 + 0.8 * std::exp(-((x - cx) * (x - cx) + (y - cy) * (y - cy)) /
                                             (2.0 * 0.12 * 0.12));
            out << std::min(255L, std::lround(g * 255.0)) << (i + 1 < n ? " " : "\n");
        }
    }
}

const std::string bin = OTMORPH_BIN;

}  // namespace

TEST_CASE("morph on an identity pair converges and writes the artifacts") {
    TempDir tmp;
    write_bump_pgm(tmp.file("a.pgm"), 17, 0.5, 0.5);
    std::string out = tmp.file("run");
    int code = run(bin + " morph --rho0 " + tmp.file("a.pgm") + " --rho1 " + tmp.file("a.pgm") +
                   " --out " + out + " --nx 17 --ny 17 --nt 5");
    CHECK(code == 0);

    for (int k = 0; k < 5; ++k) {
        char name[32];
        std::snprintf(name, sizeof(name), "frame_%04d.pgm", k);
        CHECK(fs::exists(fs::path(out) / name));
    }
    CHECK_FALSE(fs::exists(fs::path(out) / "frame_0005.pgm"));
    for (const char* f : {"rho.raw", "vx.raw", "vy.raw", "rho0.raw", "rho1.raw", "config.json",
                          "report.json"})
        CHECK(fs::exists(fs::path(out) / f));

    json report = json::parse(slurp((fs::path(out) / "report.json").string()));
    CHECK(report["verdict"] == "converged");
    CHECK(report["iterations"] == 1);
    CHECK(report["final"]["cost"].get<double>() <= 1e-10);

    SUBCASE("verify accepts the untouched run") {
        CHECK(run(bin + " verify --run " + out) == 0);
        CHECK(fs::exists(fs::path(out) / "verify.json"));
        json v = json::parse(slurp((fs::path(out) / "verify.json").string()));
        CHECK(v["passed"].is_boolean());
        CHECK(v["passed"].get<bool>());
    }

    SUBCASE("verify flags a tampered velocity payload") {
        std::fstream f((fs::path(out) / "vx.raw").string(),
                       std::ios::in | std::ios::out | std::ios::binary);
        REQUIRE(f.good());
        f.seekp(16);
        char garbage[8] = {0x40, 0x45, 0x15, 0x11, 0x22, 0x33, 0x44, 0x55};
        f.write(garbage, 8);
        f.close();
        CHECK(run(bin + " verify --run " + out + " 2>/dev/null") == 3);
    }
}

TEST_CASE("morph reports a missing input with exit 1") {
    TempDir tmp;
    write_bump_pgm(tmp.file("a.pgm"), 17, 0.5, 0.5);
    std::string missing = tmp.file("nope.pgm");
    int code = run(bin + " morph --rho0 " + missing + " --rho1 " + tmp.file("a.pgm") +
                   " --out " + tmp.file("run") + " --nx 17 --ny 17 --nt 5 2> " +
                   tmp.file("err.txt"));
    CHECK(code == 1);
    CHECK(slurp(tmp.file("err.txt")).find("nope.pgm") != std::string::npos);
}

TEST_CASE("morph exits 2 when the iteration budget is too small") {
    TempDir tmp;
    write_bump_pgm(tmp.file("a.pgm"), 17, 0.42, 0.5);
    write_bump_pgm(tmp.file("b.pgm"), 17, 0.58, 0.5);
    int code = run(bin + " morph --rho0 " + tmp.file("a.pgm") + " --rho1 " + tmp.file("b.pgm") +
                   " --out " + tmp.file("run") + " --nx 17 --ny 17 --nt 5 --fp-max-iter 1" +
                   " 2>/dev/null");
    CHECK(code == 2);
    json report = json::parse(slurp((fs::path(tmp.file("run")) / "report.json").string()));
    CHECK(report["verdict"] == "max-iterations");
}

TEST_CASE("csv frame format is honored") {
    TempDir tmp;
    write_bump_pgm(tmp.file("a.pgm"), 17, 0.5, 0.5);
    int code = run(bin + " morph --rho0 " + tmp.file("a.pgm") + " --rho1 " + tmp.file("a.pgm") +
                   " --out " + tmp.file("run") + " --nx 17 --ny 17 --nt 5 --format csv");
    CHECK(code == 0);
    CHECK(fs::exists(fs::path(tmp.file("run")) / "frame_0000.csv"));
    std::ifstream in((fs::path(tmp.file("run")) / "frame_0000.csv").string());
    std::string header;
    std::getline(in, header);
    CHECK(header == "x,y,value");
}

TEST_CASE("convergence studies") {
    SUBCASE("empty study list yields only the header") {
        TempDir tmp;
        int code = run(bin + " convergence --out " + tmp.file("conv") + " --studies \"\"");
        CHECK(code == 0);
        std::string csv = slurp(tmp.file("conv") + "/convergence.csv");
        CHECK(csv == "case,h,error,order\n");
    }

    SUBCASE("default studies show second-order elliptic decay") {
        TempDir tmp;
        int code = run(bin + " convergence --out " + tmp.file("conv"));
        CHECK(code == 0);

        std::ifstream in(tmp.file("conv") + "/convergence.csv");
        REQUIRE(in.good());
        std::string line;
        std::getline(in, line);  // header
        std::map<std::string, std::vector<double>> orders;
        while (std::getline(in, line)) {
            std::istringstream row(line);
            std::string name, h, err, order;
            std::getline(row, name, ',');
            std::getline(row, h, ',');
            std::getline(row, err, ',');
            std::getline(row, order, ',');
            if (!order.empty()) orders[name].push_back(std::stod(order));
        }
        REQUIRE(orders.count("elliptic"));
        REQUIRE(orders["elliptic"].size() == 2);
        for (double p : orders["elliptic"]) {
            CHECK(p > 1.8);
            CHECK(p < 2.2);
        }
        REQUIRE(orders.count("transport"));
        for (double p : orders["transport"]) CHECK(p > 0.8);
    }
}

TEST_CASE("unknown config key fails fast") {
    TempDir tmp;
    std::ofstream(tmp.file("c.json")) << "{\"not_a_knob\": 3}\n";
    write_bump_pgm(tmp.file("a.pgm"), 17, 0.5, 0.5);
    int code = run(bin + " morph --rho0 " + tmp.file("a.pgm") + " --rho1 " + tmp.file("a.pgm") +
                   " --out " + tmp.file("run") + " --config " + tmp.file("c.json") +
                   " 2> " + tmp.file("err.txt"));
    CHECK(code == 1);
    CHECK(slurp(tmp.file("err.txt")).find("not_a_knob") != std::string::npos);
}
