#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "mixsob/runner.hpp"

using namespace mixsob;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("mixsob-cli-" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

fs::path write(const fs::path& dir, const std::string& name, const std::string& body) {
    std::ofstream(dir / name) << body;
    return dir / name;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p, std::string* comment = nullptr) {
    std::ifstream is(p);
    std::string line;
    std::vector<std::vector<std::string>> rows;
    while (std::getline(is, line)) {
        if (line.rfind("#", 0) == 0) {
            if (comment) *comment = line;
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

TEST(Config, DefaultsValidateAndHashIsStable) {
    for (auto c : all_subcommands()) {
        auto a = default_config(c), b = default_config(c);
        EXPECT_EQ(a.hash(), b.hash());
        EXPECT_EQ(a.hash().size(), 16u);
    }
    EXPECT_NE(default_config(Subcommand::eigen).hash(), default_config(Subcommand::bn_linear).hash());
    auto seeded = parse_config(Subcommand::eigen, {{"eigen", nlohmann::json::object()}}, 7);
    EXPECT_EQ(seeded.seed(), 7u);
    EXPECT_NE(seeded.hash(), default_config(Subcommand::eigen).hash());
    // Integers and floats for number fields canonicalize the same.
    auto i = parse_config(Subcommand::eigen, {{"eigen", {{"L", 2}}}});
    auto f = parse_config(Subcommand::eigen, {{"eigen", {{"L", 2.0}}}});
    EXPECT_EQ(i.hash(), f.hash());
}

TEST(Config, RejectsMalformedBlocks) {
    using nlohmann::json;
    auto bad = [](json doc) { EXPECT_THROW(parse_config(Subcommand::eigen, doc), ConfigError) << doc.dump(); };
    bad({{"eigen", {{"m", 32}}}});
    bad({{"eigen", {{"m", 33}, {"bogus", 1}}}});
    bad({{"eigen", {{"s", 1.0}}}});
    bad({{"eigen", {{"m", 33.5}}}});
    bad({{"eigen", {{"radius", 1.5}}}});
    bad({{"eigen", {{"domain", "torus"}}}});
    bad({{"eigen", {{"domain", "box"}, {"half_widths", {1.0, 1.0}}}}});
    bad({{"eigen", json::object()}, {"bn-linear", json::object()}});
    bad({{"bn-linear", json::object()}});
    bad(json::array());
    EXPECT_THROW(parse_config(Subcommand::bn_superlinear, {{"bn-superlinear", {{"p", 5.0}}}}), ConfigError);
    EXPECT_THROW(parse_config(Subcommand::bn_linear, {{"bn-linear", {{"lambdas", {1, 2, 3, 5, 4}}}}}), ConfigError);
    EXPECT_THROW(parse_config(Subcommand::reproduce_all, {{"reproduce-all", {{"sharp_m", {17, 24}}}}}), ConfigError);
}

TEST(Config, TomlAndJsonEncodingsAgree) {
    auto dir = scratch("enc");
    auto t = write(dir, "a.toml", "[sobolev-scan]\nmode = \"shrink\"\ns = 0.5\nparameters = [1, 2, 4, 8]\nm = 9\n");
    auto j = write(dir, "a.json", R"({"sobolev-scan": {"mode": "shrink", "s": 0.5, "parameters": [1, 2, 4, 8], "m": 9}})");
    EXPECT_EQ(load_config(Subcommand::sobolev_scan, t).hash(), load_config(Subcommand::sobolev_scan, j).hash());
    auto broken = write(dir, "b.toml", "[sobolev-scan\nmode = 1\n");
    EXPECT_THROW(load_config(Subcommand::sobolev_scan, broken), ConfigError);
    EXPECT_THROW(load_config(Subcommand::sobolev_scan, dir / "missing.toml"), ConfigError);
}

TEST(Cli, EvenGridIsAConfigErrorWithNoOutputs) {
    auto dir = scratch("even");
    auto cfg = write(dir, "eigen.toml", "[eigen]\nm = 24\n");
    RunOptions o;
    o.out_root = dir / "out";
    auto r = run(Subcommand::eigen, cfg, o);
    EXPECT_EQ(r.exit_code, exit_config);
    EXPECT_NE(r.message.find("odd"), std::string::npos);
    EXPECT_FALSE(fs::exists(dir / "out"));
}

TEST(Cli, EigenReportsOrderedEigenvalues) {
    auto dir = scratch("eigen");
    auto cfg = write(dir, "eigen.toml", "[eigen]\nm = 13\n");
    RunOptions o;
    o.out_root = dir / "out";
    auto r = run(Subcommand::eigen, cfg, o);
    ASSERT_EQ(r.exit_code, exit_ok) << r.message;
    EXPECT_EQ(r.directory.filename().string(), "eigen-" + load_config(Subcommand::eigen, cfg).hash());
    auto j = nlohmann::json::parse(slurp(r.directory / "eigen.json"));
    EXPECT_LT(j["fractional"]["lambda"].get<double>(), j["mixed"]["lambda"].get<double>());
    EXPECT_EQ(j["grid"]["m"], 13);
    EXPECT_EQ(j["provenance"]["config_hash"], load_config(Subcommand::eigen, cfg).hash());
    std::string comment;
    auto rows = read_csv(r.directory / "eigen.csv", &comment);
    EXPECT_NE(comment.find("config_hash="), std::string::npos);
    EXPECT_NE(comment.find(tool_version()), std::string::npos);
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_EQ(rows[0][0], "part");
    // 17 significant digits round-trip the double exactly.
    EXPECT_EQ(std::stod(rows[3][1]), j["mixed"]["lambda"].get<double>());
}

TEST(Cli, BnLinearCurveIsNonincreasing) {
    auto dir = scratch("bnl");
    auto cfg = write(dir, "bn.toml", "[bn-linear]\nm = 13\nsamples = 8\nplateau_reference = \"first\"\n");
    RunOptions o;
    o.out_root = dir / "out";
    auto r = run(Subcommand::bn_linear, cfg, o);
    ASSERT_EQ(r.exit_code, exit_ok) << r.message;
    auto rows = read_csv(r.directory / "bn-linear.csv");
    ASSERT_EQ(rows.size(), 9u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"lambda", "s_value", "residual", "iters", "regime_label"}));
    for (std::size_t i = 2; i < rows.size(); ++i) EXPECT_LE(std::stod(rows[i][1]), std::stod(rows[i - 1][1]) + 1e-6);
    EXPECT_EQ(rows.back()[4], "supercritical");
    for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LT(std::stod(rows[i][2]), 1e-4);
}

TEST(Cli, RerunIsByteIdenticalAndOutputsAreConfigAddressed) {
    auto dir = scratch("det");
    auto cfg = write(dir, "c.toml", "[competitor-scan]\neps_k_first = 4\neps_k_last = 12\n");
    RunOptions o;
    o.out_root = dir / "a";
    auto a = run(Subcommand::competitor_scan, cfg, o);
    o.out_root = dir / "b";
    auto b = run(Subcommand::competitor_scan, cfg, o);
    ASSERT_EQ(a.exit_code, exit_ok) << a.message;
    ASSERT_EQ(b.exit_code, exit_ok) << b.message;
    EXPECT_TRUE(compare_output_trees(a.directory, b.directory).empty());
    o.seed = 99;
    auto c = run(Subcommand::competitor_scan, cfg, o);
    EXPECT_NE(c.directory, b.directory);
    EXPECT_TRUE(fs::exists(b.directory / "competitors.csv"));
}

TEST(Cli, SpreadScanOnDivergentSeminormStillWritesRows) {
    auto dir = scratch("spread");
    auto cfg = write(dir, "s.toml", "[sobolev-scan]\ns = 0.5\nparameters = [1, 2, 4, 8]\n");
    RunOptions o;
    o.out_root = dir / "out";
    auto r = run(Subcommand::sobolev_scan, cfg, o);
    ASSERT_EQ(r.exit_code, exit_ok) << r.message;
    auto rows = read_csv(r.directory / "scan.csv");
    ASSERT_EQ(rows.size(), 5u);
    EXPECT_EQ(rows[1][1], "inf");
    EXPECT_EQ(rows[1][3], "nan");
}
