//
// Copyright © 2026 The causalflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "test_support.hpp"

#include "causalflow/cli.hpp"
#include "causalflow/report.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace causalflow;
using namespace causalflow::test;
namespace fs = std::filesystem;

namespace
{

struct CliResult
{
    int code = 0;
    std::string out;
    std::string err;
};

CliResult Invoke(std::vector<std::string> args)
{
    args.insert(args.begin(), "causalflow");
    std::vector<char*> argv;
    for (auto& a : args)
        argv.push_back(a.data());
    std::ostringstream out, err;
    CliResult r;
    r.code = RunCli(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string Slurp(const fs::path& p)
{
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

fs::path Scratch(const std::string& name)
{
    fs::path p = fs::temp_directory_path() / ("causalflow_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void WriteText(const fs::path& p, const std::string& text)
{
    std::ofstream f(p, std::ios::binary);
    f << text;
}

}   // namespace

TEST(Report, CsvQuoting)
{
    auto rows = ParseCsv("a,\"b,c\",\"say \"\"hi\"\"\"\n\"multi\nline\",,x\n");
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{ "a", "b,c", "say \"hi\"" }));
    EXPECT_EQ(rows[1], (std::vector<std::string>{ "multi\nline", "", "x" }));
    EXPECT_THROW(ParseCsv("\"open"), std::invalid_argument);
}

TEST(Report, CandidateEncodingRoundTrip)
{
    ScheduleCandidate c;
    c.cuts = { 2, 5 };
    c.tiles = { { 4, 2 }, { 1, 1 }, { 16, 8 } };
    c.dramSkip = { true, false };
    EXPECT_EQ(DecodeCandidate(EncodeCandidate(c)), c);
    ScheduleCandidate none;
    none.tiles = { { 3, 1 } };
    EXPECT_EQ(DecodeCandidate(EncodeCandidate(none)), none);
    EXPECT_THROW(DecodeCandidate("cuts=1;tiles=(1,x)"), std::invalid_argument);
}

TEST(Report, EveryRowRoundTrips)
{
    const AcceleratorSpec hw = PresetAccelerator("meta-edge-like");
    FlattenedWorkload flat = Flatten(LoadWorkload(DeskWorkloadPath("resnet_like")), ExecutionMode::Batch);
    ExploreResult r = Explore(flat, hw, {});
    std::vector<std::string> names;
    for (const auto& l : hw.levels)
        names.push_back(l.name);
    auto table = ParseCsv(CandidatesCsv(r.evaluated, names));
    ASSERT_EQ(table.size(), r.evaluated.size() + 1);
    EXPECT_EQ(table[0], CostColumns(names));
    for (size_t i = 0; i < r.evaluated.size(); ++i)
    {
        const EvaluatedCandidate back = ParseCsvRow(table[0], table[i + 1]);
        const CostBreakdown& c = r.evaluated[i].cost;
        EXPECT_EQ(back.candidate, r.evaluated[i].candidate);
        EXPECT_EQ(back.cost.latencyCycles, c.latencyCycles);
        EXPECT_EQ(back.cost.energy, c.energy);
        EXPECT_EQ(back.cost.edp, c.edp);
        EXPECT_EQ(back.cost.peakIoCacheBytes, c.peakIoCacheBytes);
        EXPECT_EQ(back.cost.macs, c.macs);
        EXPECT_EQ(back.cost.utilAvg, c.utilAvg);
        ASSERT_EQ(back.cost.levels.size(), c.levels.size());
        for (size_t l = 0; l < c.levels.size(); ++l)
        {
            EXPECT_EQ(back.cost.levels[l].reads, c.levels[l].reads);
            EXPECT_EQ(back.cost.levels[l].writes, c.levels[l].writes);
        }
        EXPECT_EQ(CsvRow(back), CsvRow(r.evaluated[i]));
    }
}

TEST(Cli, TransformStrideOneUnchanged)
{
    const fs::path dir = Scratch("t1");
    WorkloadGraph g = Graph({ 4, 9, 1 }, { Conv(1, 2, 3, 3), Conv(2, 1, 1, 3) });
    WriteText(dir / "w.json", SerializeWorkload(g));
    CliResult r = Invoke({ "transform", "--workload", (dir / "w.json").string() });
    ASSERT_EQ(r.code, 0) << r.err;
    WorkloadGraph back = ParseWorkload([&] {
        auto j = nlohmann::json::parse(r.out);
        for (auto& l : j["layers"])
            l.erase("interleave");
        return j.dump();
    }());
    EXPECT_EQ(back.layers, g.layers);
}

TEST(Cli, TransformAnnotatesDilations)
{
    CliResult r = Invoke({ "transform", "--workload", WorkloadPath("fig5_chain"), "--mode", "batch" });
    ASSERT_EQ(r.code, 0) << r.err;
    auto j = nlohmann::json::parse(r.out);
    ASSERT_EQ(j["layers"].size(), 3u);
    EXPECT_EQ(j["layers"][0]["dilation"][1], 1);
    EXPECT_EQ(j["layers"][1]["dilation"][1], 2);
    EXPECT_EQ(j["layers"][2]["dilation"][1], 4);
    EXPECT_EQ(j["layers"][2]["interleave"]["out"], 4);
    for (const auto& l : j["layers"])
        EXPECT_EQ(l["stride"][1], 1);

    const fs::path dir = Scratch("t2");
    ASSERT_EQ(Invoke({ "transform", "--workload", WorkloadPath("fig5_chain"), "--out", dir.string() }).code, 0);
    EXPECT_EQ(Slurp(dir / "flattened.workload"), r.out);
}

TEST(Cli, DenseLayerFails)
{
    const fs::path dir = Scratch("t3");
    WriteText(dir / "fc.json",
              R"({"input_shape": {"x": 1, "y": 4, "c": 1}, "layers": [{"id": 1, "kind": "fc", "k": 2}]})");
    CliResult r = Invoke({ "transform", "--workload", (dir / "fc.json").string() });
    EXPECT_EQ(r.code, kExitConfig);
    EXPECT_NE(r.err.find("unsupported kernel kind"), std::string::npos) << r.err;
}

TEST(Cli, ExploreSmokeAndDeterminism)
{
    const fs::path a = Scratch("e1");
    const fs::path b = Scratch("e2");
    const auto start = std::chrono::steady_clock::now();
    CliResult r = Invoke({ "explore", "--workload", WorkloadPath("fig5_chain"), "--out", a.string() });
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_LT(secs, 1.0);
    auto pareto = ParseCsv(Slurp(a / "pareto.csv"));
    EXPECT_GE(pareto.size(), 2u);

    ASSERT_EQ(Invoke({ "explore", "--workload", WorkloadPath("fig5_chain"), "--out", b.string(), "--threads", "3" }).code,
              0);
    for (const char* f : { "candidates.csv", "pareto.csv", "summary.json" })
    {
        EXPECT_EQ(Slurp(a / f), Slurp(b / f)) << f;
    }
}

TEST(Cli, SummaryNamesTableBest)
{
    const fs::path dir = Scratch("e3");
    CliResult r = Invoke({ "explore", "--workload", DeskWorkloadPath("stft_cnn"), "--objective", "edp", "--out",
                        dir.string() });
    ASSERT_EQ(r.code, 0) << r.err;
    auto table = ParseCsv(Slurp(dir / "candidates.csv"));
    ASSERT_GT(table.size(), 1u);
    size_t best = 1;
    for (size_t i = 2; i < table.size(); ++i)
    {
        if (std::stod(table[i][3]) < std::stod(table[best][3]))
            best = i;
    }
    auto summary = nlohmann::json::parse(Slurp(dir / "summary.json"));
    EXPECT_EQ(summary["best_edp"]["candidate"], table[best][0]);
    EXPECT_EQ(summary["objective"], "edp");
    EXPECT_EQ(summary["evaluated_count"], table.size() - 1);
}

TEST(Cli, CompareReportsGains)
{
    CliResult r = Invoke({ "compare", "--workload", DeskWorkloadPath("stft_cnn") });
    ASSERT_EQ(r.code, 0) << r.err;
    auto rows = ParseCsv(r.out);
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_EQ(rows[1][0], "lbl");
    EXPECT_EQ(rows[2][0], "df_ft");
    EXPECT_EQ(rows[3][0], "joint");
    for (size_t c = 5; c < 8; ++c)
        EXPECT_EQ(rows[1][c], "1");
    EXPECT_GE(std::stod(rows[3][7]), 1.0);

    CliResult modes = Invoke({ "compare", "--workload", DeskWorkloadPath("stft_cnn"), "--mode", "realtime", "--modes" });
    ASSERT_EQ(modes.code, 0) << modes.err;
    EXPECT_NE(modes.out.find("mac_reduction"), std::string::npos);
}

TEST(Cli, OracleMacReductionOnStridedNet)
{
    MacReduction m = OracleMacReduction(LoadWorkload(DeskWorkloadPath("stft_cnn")),
                                        PresetAccelerator("meta-edge-like"), 1);
    EXPECT_GT(m.realTimeMacs, 0);
    EXPECT_GT(m.Factor(), 1.0);
}

TEST(Cli, EvaluateSingleCandidate)
{
    CliResult r = Invoke({ "evaluate", "--workload", WorkloadPath("fig5_chain"), "--candidate", "cuts=;tiles=(1,2);ds=" });
    ASSERT_EQ(r.code, 0) << r.err;
    auto rows = ParseCsv(r.out);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[1][0], "cuts=;tiles=(1,2);ds=");

    EXPECT_EQ(Invoke({ "evaluate", "--workload", WorkloadPath("fig5_chain"), "--candidate", "cuts=9;tiles=(1,1)|(1,1);ds=0" })
                  .code,
              kExitConfig);
}

TEST(Cli, ExitCodes)
{
    EXPECT_EQ(Invoke({ "explore", "--workload", "/nonexistent/w.json" }).code, kExitConfig);
    EXPECT_EQ(Invoke({ "explore", "--workload", WorkloadPath("fig5_chain"), "--mode", "sideways" }).code, kExitConfig);
    EXPECT_EQ(Invoke({ "explore", "--workload", WorkloadPath("fig5_chain"), "--tiles", "0x3" }).code, kExitConfig);
    EXPECT_EQ(Invoke({ "explore" }).code, kExitConfig);

    const fs::path dir = Scratch("x1");
    AcceleratorSpec hw = PresetAccelerator("meta-edge-like");
    for (auto& l : hw.levels)
        if (!l.Unbounded())
            l.capacityBytes = 1;
    WriteText(dir / "hw.json", SerializeAccelerator(hw));
    CliResult r = Invoke({ "explore", "--workload", WorkloadPath("stft_cnn"), "--hw", (dir / "hw.json").string() });
    EXPECT_EQ(r.code, kExitInfeasible) << r.err;
}

TEST(Cli, TileListParsing)
{
    EXPECT_TRUE(ParseTileList("auto").empty());
    EXPECT_EQ(ParseTileList("1x1,16x4"), (std::vector<TileConfig>{ { 1, 1 }, { 16, 4 } }));
    EXPECT_THROW(ParseTileList("4"), ConfigError);
    EXPECT_THROW(ParseTileList("4x"), ConfigError);
}

TEST(Cli, VerifyPrintsSeeds)
{
    CliResult r = Invoke({ "verify", "--count", "5", "--seed", "40" });
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("PASS transform-equivalence: 5/5 seeds 40..44"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("PASS schedule-equivalence"), std::string::npos) << r.out;
}
