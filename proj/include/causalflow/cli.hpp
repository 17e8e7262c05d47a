//
// Copyright © 2026 The causalflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "causalflow/dse.hpp"
#include "causalflow/hardware.hpp"
#include "causalflow/transform.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace causalflow
{

enum ExitCode : int
{
    kExitOk = 0,
    kExitConfig = 1,
    kExitInfeasible = 2,
    kExitInternal = 3,
};

struct RunManifest
{
    std::string workloadPath;
    std::string hardware = "meta-edge-like";   // file path or preset name
    ExecutionMode mode = ExecutionMode::Batch;
    Objective objective = Objective::Pareto;
    int maxCuts = 2;
    std::string tiles = "auto";
    std::string outDir;
    int threads = 0;
    uint64_t seed = 0;
};

/// Preset name or path to a hardware JSON file.
AcceleratorSpec ResolveHardware(const std::string& spec);

/// "auto" (empty result) or a comma-separated list of TXxTY points, e.g. "1x1,4x4".
std::vector<TileConfig> ParseTileList(const std::string& text);

struct ExploreOutputs
{
    std::string candidatesCsv;
    std::string paretoCsv;
    std::string summaryJson;
};

ExploreOutputs RunExploreToText(const RunManifest& manifest);

struct CompareRow
{
    std::string name;   // lbl, df_ft, joint
    EvaluatedCandidate schedule;
    double latencyRatio = 1.0;   // LBL value / this value
    double energyRatio = 1.0;
    double edpRatio = 1.0;
};

std::vector<CompareRow> RunCompare(const RunManifest& manifest);
std::string CompareCsv(const std::vector<CompareRow>& rows);

/// Oracle-counted MACs of one RealTime update and of one Baseline frame.
struct MacReduction
{
    int64_t realTimeMacs = 0;
    int64_t baselineFrameMacs = 0;
    double Factor() const;
};

MacReduction OracleMacReduction(const WorkloadGraph& graph, const AcceleratorSpec& hw, uint64_t seed);

/// Full command line entry point. Returns the process exit code.
int RunCli(int argc, char** argv, std::ostream& out, std::ostream& err);

}   // namespace causalflow
