//
// Copyright © 2026 The causalflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "causalflow/cli.hpp"

#include "causalflow/oracle.hpp"
#include "causalflow/report.hpp"
#include "causalflow/workload.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

namespace causalflow
{

AcceleratorSpec ResolveHardware(const std::string& spec)
{
    for (const auto& name : PresetNames())
    {
        if (name == spec)
        {
            return PresetAccelerator(name);
        }
    }
    return LoadAccelerator(spec);
}

std::vector<TileConfig> ParseTileList(const std::string& text)
{
    std::vector<TileConfig> tiles;
    if (text.empty() || text == "auto")
    {
        return tiles;
    }
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
    {
        const auto x = item.find('x');
        try
        {
            if (x == std::string::npos)
            {
                throw std::invalid_argument("missing 'x'");
            }
            size_t used = 0;
            TileConfig t;
            t.tx = std::stoll(item.substr(0, x), &used);
            if (used != x)
            {
                throw std::invalid_argument("trailing characters");
            }
            t.ty = std::stoll(item.substr(x + 1), &used);
            if (used != item.size() - x - 1 || t.tx < 1 || t.ty < 1)
            {
                throw std::invalid_argument("bad extent");
            }
            tiles.push_back(t);
        }
        catch (const std::exception&)
        {
            throw ConfigError("bad tile '" + item + "' (expected TXxTY, e.g. 4x4)");
        }
    }
    if (tiles.empty())
    {
        throw ConfigError("empty tile list");
    }
    return tiles;
}

namespace
{

FlattenedWorkload LoadFlattened(const RunManifest& m)
{
    return Flatten(LoadWorkload(m.workloadPath), m.mode);
}

SearchSpace SpaceOf(const RunManifest& m)
{
    SearchSpace space;
    space.tiles = ParseTileList(m.tiles);
    space.maxCuts = m.maxCuts;
    space.objective = m.objective;
    space.threads = m.threads;
    return space;
}

std::vector<std::string> LevelNames(const AcceleratorSpec& hw)
{
    std::vector<std::string> names;
    for (const auto& l : hw.levels)
    {
        names.push_back(l.name);
    }
    return names;
}

void WriteFile(const std::string& dir, const std::string& name, const std::string& text)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    const auto path = std::filesystem::path(dir) / name;
    std::ofstream f(path, std::ios::binary);
    f << text;
    if (!f)
    {
        throw ConfigError("cannot write '" + path.string() + "'");
    }
}

double Ratio(double base, double value)
{
    return value > 0 ? base / value : 0.0;
}

}   // namespace

ExploreOutputs RunExploreToText(const RunManifest& manifest)
{
    const FlattenedWorkload flat = LoadFlattened(manifest);
    const AcceleratorSpec hw = ResolveHardware(manifest.hardware);
    const ExploreResult result = Explore(flat, hw, SpaceOf(manifest));
    const auto names = LevelNames(hw);
    RunInfo info;
    info.workload = manifest.workloadPath;
    info.hardware = hw.name;
    info.mode = manifest.mode;
    info.objective = manifest.objective;
    info.maxCuts = manifest.maxCuts;
    info.seed = manifest.seed;
    return { CandidatesCsv(result.evaluated, names), CandidatesCsv(result.pareto, names), SummaryJson(info, result) };
}

std::vector<CompareRow> RunCompare(const RunManifest& manifest)
{
    const FlattenedWorkload flat = LoadFlattened(manifest);
    const AcceleratorSpec hw = ResolveHardware(manifest.hardware);
    const Objective objective = manifest.objective == Objective::Pareto ? Objective::Edp : manifest.objective;
    std::vector<CompareRow> rows(3);
    rows[0].name = "lbl";
    rows[0].schedule = LayerByLayerSchedule(flat, hw);
    rows[1].name = "df_ft";
    rows[1].schedule = FixedTilingSchedule(flat, hw);
    rows[2].name = "joint";
    rows[2].schedule = Explore(flat, hw, SpaceOf(manifest)).Best(objective);
    const CostBreakdown& base = rows[0].schedule.cost;
    for (auto& r : rows)
    {
        const CostBreakdown& c = r.schedule.cost;
        r.latencyRatio = Ratio(static_cast<double>(base.latencyCycles), static_cast<double>(c.latencyCycles));
        r.energyRatio = Ratio(base.energy, c.energy);
        r.edpRatio = Ratio(base.edp, c.edp);
    }
    return rows;
}

std::string CompareCsv(const std::vector<CompareRow>& rows)
{
    std::string out = "schedule,candidate,latency_cycles,energy,edp,latency_gain,energy_gain,edp_gain\n";
    for (const auto& r : rows)
    {
        const CostBreakdown& c = r.schedule.cost;
        out += r.name + ",\"" + EncodeCandidate(r.schedule.candidate) + "\"," + std::to_string(c.latencyCycles) + "," +
               FormatDouble(c.energy) + "," + FormatDouble(c.edp) + "," + FormatDouble(r.latencyRatio) + "," +
               FormatDouble(r.energyRatio) + "," + FormatDouble(r.edpRatio) + "\n";
    }
    return out;
}

double MacReduction::Factor() const
{
    return realTimeMacs > 0 ? static_cast<double>(baselineFrameMacs) / static_cast<double>(realTimeMacs) : 0.0;
}

MacReduction OracleMacReduction(const WorkloadGraph& graph, const AcceleratorSpec& hw, uint64_t seed)
{
    auto run = [&](ExecutionMode mode) {
        const FlattenedWorkload flat = Flatten(graph, mode);
        const SubStack whole{ 0, flat.SinkIndex() };
        ScheduleCandidate cand;
        cand.tiles = { ExitTileSpace(flat, whole) };
        const WeightSet w = MakeWeights(flat, seed);
        std::mt19937_64 rng(seed);
        const Tensor input = RandomTensor(flat.inputShape, rng);
        const auto trace = ExecuteTiledDf(flat, w, cand, hw, input).second;
        return CountMacsExecuted(trace) / flat.framesPerInvocation;
    };
    MacReduction r;
    r.realTimeMacs = run(ExecutionMode::RealTime);
    r.baselineFrameMacs = run(ExecutionMode::Baseline);
    return r;
}

namespace
{

void AddCommon(CLI::App* cmd, RunManifest& m, std::string& mode, std::string& objective)
{
    cmd->add_option("--workload", m.workloadPath, "Workload JSON file")->required();
    cmd->add_option("--hw", m.hardware, "Hardware JSON file or preset name");
    cmd->add_option("--mode", mode, "baseline|realtime|batch");
    cmd->add_option("--objective", objective, "lat|ene|edp|pareto");
    cmd->add_option("--max-cuts", m.maxCuts, "Maximum number of fusion cuts");
    cmd->add_option("--tiles", m.tiles, "auto or a list such as 1x1,4x4");
    cmd->add_option("--out", m.outDir, "Output directory");
    cmd->add_option("--threads", m.threads, "Worker threads (0 = all cores)");
    cmd->add_option("--seed", m.seed, "Seed for oracle runs");
}

int Dispatch(int argc, char** argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{ "Causal spatio-temporal CNN scheduling explorer" };
    app.require_subcommand(1);
    RunManifest m;
    std::string mode = "batch";
    std::string objective = "pareto";
    std::string candidateText;
    int count = 100;
    bool compareModes = false;

    auto* transform = app.add_subcommand("transform", "Write the flattened workload");
    transform->add_option("--workload", m.workloadPath, "Workload JSON file")->required();
    transform->add_option("--mode", mode, "baseline|realtime|batch");
    transform->add_option("--out", m.outDir, "Output directory");

    auto* evaluate = app.add_subcommand("evaluate", "Cost a single schedule candidate");
    AddCommon(evaluate, m, mode, objective);
    evaluate->add_option("--candidate", candidateText, "Encoded candidate, e.g. cuts=;tiles=(4,4);ds=")->required();

    auto* explore = app.add_subcommand("explore", "Search the scheduling space");
    AddCommon(explore, m, mode, objective);

    auto* compare = app.add_subcommand("compare", "Layer-by-layer vs fixed tiling vs joint search");
    AddCommon(compare, m, mode, objective);
    compare->add_flag("--modes", compareModes, "Also report the oracle RealTime-vs-Baseline MAC reduction");

    auto* verify = app.add_subcommand("verify", "Run the equivalence fuzz suites");
    verify->add_option("--hw", m.hardware, "Hardware JSON file or preset name");
    verify->add_option("--seed", m.seed, "First seed");
    verify->add_option("--count", count, "Workloads per suite");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    m.mode = ParseExecutionMode(mode);
    m.objective = ParseObjective(objective);

    if (*transform)
    {
        const std::string text = SerializeFlattened(Flatten(LoadWorkload(m.workloadPath), m.mode));
        if (m.outDir.empty())
        {
            out << text;
        }
        else
        {
            WriteFile(m.outDir, "flattened.workload", text);
        }
        return kExitOk;
    }
    if (*evaluate)
    {
        const FlattenedWorkload flat = LoadFlattened(m);
        const AcceleratorSpec hw = ResolveHardware(m.hardware);
        EvaluatedCandidate ec;
        ec.candidate = DecodeCandidate(candidateText);
        ec.cost = EvaluateCandidate(flat, ec.candidate, hw);
        const std::string text = CandidatesCsv({ ec }, LevelNames(hw));
        out << text;
        if (!m.outDir.empty())
        {
            WriteFile(m.outDir, "evaluation.csv", text);
        }
        return kExitOk;
    }
    if (*explore)
    {
        const ExploreOutputs o = RunExploreToText(m);
        if (m.outDir.empty())
        {
            out << o.summaryJson;
        }
        else
        {
            WriteFile(m.outDir, "candidates.csv", o.candidatesCsv);
            WriteFile(m.outDir, "pareto.csv", o.paretoCsv);
            WriteFile(m.outDir, "summary.json", o.summaryJson);
            out << "wrote candidates.csv, pareto.csv, summary.json to " << m.outDir << "\n";
        }
        return kExitOk;
    }
    if (*compare)
    {
        std::string text = CompareCsv(RunCompare(m));
        if (compareModes)
        {
            const MacReduction r = OracleMacReduction(LoadWorkload(m.workloadPath), ResolveHardware(m.hardware), m.seed);
            text += "\nrealtime_macs,baseline_frame_macs,mac_reduction\n" + std::to_string(r.realTimeMacs) + "," +
                    std::to_string(r.baselineFrameMacs) + "," + FormatDouble(r.Factor()) + "\n";
        }
        out << text;
        if (!m.outDir.empty())
        {
            WriteFile(m.outDir, "compare.csv", text);
        }
        return kExitOk;
    }

    // verify
    const AcceleratorSpec hw = ResolveHardware(m.hardware);
    bool ok = true;
    auto report = [&](const std::string& name, const FuzzOutcome& o) {
        const bool pass = o.failedSeeds.empty();
        ok = ok && pass;
        out << (pass ? "PASS " : "FAIL ") << name << ": " << o.passed << "/" << count << " seeds " << m.seed << ".."
            << m.seed + static_cast<uint64_t>(count) - 1 << "\n";
        for (size_t i = 0; i < o.failedSeeds.size(); ++i)
        {
            out << "  seed " << o.failedSeeds[i] << (i < o.messages.size() ? ": " + o.messages[i] : "") << "\n";
        }
    };
    report("transform-equivalence", FuzzTransformEquivalence(m.seed, count));
    report("schedule-equivalence", FuzzScheduleEquivalence(m.seed, count, hw));
    return ok ? kExitOk : kExitInternal;
}

}   // namespace

int RunCli(int argc, char** argv, std::ostream& out, std::ostream& err)
{
    try
    {
        return Dispatch(argc, argv, out, err);
    }
    catch (const ConfigError& e)
    {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    catch (const std::invalid_argument& e)
    {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    catch (const InfeasibleSpace& e)
    {
        err << "infeasible: " << e.what() << "\n";
        return kExitInfeasible;
    }
    catch (const OnChipOverflow& e)
    {
        err << "infeasible: " << e.what() << "\n";
        return kExitInfeasible;
    }
    catch (const std::exception& e)
    {
        err << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}

}   // namespace causalflow
