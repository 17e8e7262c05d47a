//
// Copyright © 2026 The causalflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "causalflow/oracle.hpp"

#include <algorithm>
#include <optional>
#include <sstream>

namespace causalflow
{

namespace
{

int64_t Pick(std::mt19937_64& rng, int64_t lo, int64_t hi)
{
    return std::uniform_int_distribution<int64_t>(lo, hi)(rng);
}

double Unit(std::mt19937_64& rng)
{
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

/// Largest stride from {4, 2, 1} allowed by `maxStride`.
int64_t ClampStride(int64_t wanted, int64_t maxStride)
{
    while (wanted > maxStride)
    {
        wanted /= 2;
    }
    return std::max<int64_t>(wanted, 1);
}

std::optional<WorkloadGraph> TryRandomWorkload(std::mt19937_64& rng, const FuzzOptions& opt)
{
    WorkloadGraph g;
    const int64_t c0 = Pick(rng, 1, 3);
    const int64_t x0 = Pick(rng, 3, std::min<int64_t>(12, opt.maxExtent));
    const int depth = static_cast<int>(Pick(rng, 1, opt.maxDepth));
    int cur = kNetworkInput;
    int64_t curX = x0;
    int64_t curC = c0;
    int64_t period = 1;
    int nextId = 1;

    for (int attempts = 0; static_cast<int>(g.layers.size()) < depth && attempts < 64; ++attempts)
    {
        const double r = Unit(rng);
        const int remaining = depth - static_cast<int>(g.layers.size());
        if (opt.residuals && remaining >= 2 && r < 0.25)
        {
            // Shape-preserving branch joined back onto its own input.
            LayerSpec branch;
            branch.id = nextId++;
            branch.kind = LayerKind::Conv;
            branch.outChannels = curC;
            branch.kernelX = curX >= 3 && Unit(rng) < 0.5 ? 3 : 1;
            branch.padLeft = branch.padRight = (branch.kernelX - 1) / 2;
            branch.predecessors = { cur };
            LayerSpec join;
            join.id = nextId++;
            join.kind = LayerKind::ElementwiseAdd;
            join.predecessors = { cur, branch.id };
            g.layers.push_back(branch);
            g.layers.push_back(join);
            cur = join.id;
            continue;
        }
        LayerSpec l;
        l.id = nextId;
        l.predecessors = { cur };
        if (r < 0.45)
        {
            l.kind = LayerKind::Pool;
            l.kernelX = std::min<int64_t>(Pick(rng, 1, 2), curX);
            l.kernelY = Pick(rng, 1, 2);
            l.strideX = l.kernelX;
            l.strideY = Pick(rng, 1, 2);
        }
        else
        {
            l.kind = LayerKind::Conv;
            l.outChannels = Pick(rng, 1, 3);
            l.kernelX = Pick(rng, 1, 3);
            l.kernelY = Pick(rng, 1, 3);
            l.dilationX = l.kernelX > 1 ? Pick(rng, 1, 2) : 1;
            l.dilationY = l.kernelY > 1 ? Pick(rng, 1, 2) : 1;
            l.strideX = Pick(rng, 1, 2);
            const int64_t strides[] = { 1, 2, 4 };
            l.strideY = strides[Pick(rng, 0, 2)];
            const int64_t spanX = (l.kernelX - 1) * l.dilationX;
            l.padLeft = Pick(rng, 0, spanX);
            l.padRight = Pick(rng, 0, spanX - l.padLeft);
        }
        if (opt.contiguousTaps)
        {
            l.strideX = ClampStride(l.strideX, (l.kernelX - 1) * l.dilationX + 1);
            l.strideY = ClampStride(l.strideY, (l.kernelY - 1) * l.dilationY + 1);
        }
        if (period * l.strideY > 16)
        {
            l.strideY = 1;
        }
        int64_t x = SlidingOutputExtent(curX, l.padLeft, l.padRight, l.kernelX, l.dilationX, l.strideX);
        if (x < 1)
        {
            continue;
        }
        period *= l.strideY;
        curX = x;
        curC = l.kind == LayerKind::Conv ? l.outChannels : curC;
        cur = l.id;
        ++nextId;
        g.layers.push_back(l);
    }
    if (g.layers.empty())
    {
        return std::nullopt;
    }

    // Size the temporal input so the sink emits a couple of rows.
    for (int64_t outRows = Pick(rng, 1, 2); outRows >= 1; --outRows)
    {
        int64_t rows = outRows;
        for (int idx = static_cast<int>(g.layers.size()) - 1; idx >= 0;)
        {
            const LayerSpec& l = g.layers[static_cast<size_t>(idx)];
            if (l.kind != LayerKind::ElementwiseAdd)
            {
                rows = (rows - 1) * l.strideY + (l.kernelY - 1) * l.dilationY + 1;
            }
            int p = l.predecessors.front();
            idx = p == kNetworkInput ? -1 : g.IndexOf(p);
        }
        if (rows <= opt.maxExtent)
        {
            g.inputShape = { x0, rows, c0 };
            if (ValidateGraph(g).empty())
            {
                return g;
            }
        }
    }
    return std::nullopt;
}

std::vector<std::vector<int>> ValidCutSets(const FlattenedWorkload& flat, int maxCuts)
{
    const int n = static_cast<int>(flat.layers.size());
    std::vector<std::vector<int>> out;
    auto valid = [&](const std::vector<int>& cuts) {
        for (const auto& s : SubStacksOf(cuts, n))
        {
            if (!IsValidSubStack(flat, s))
            {
                return false;
            }
        }
        return true;
    };
    out.push_back({});
    for (int a = 1; a < n && maxCuts >= 1; ++a)
    {
        if (valid({ a }))
        {
            out.push_back({ a });
        }
        for (int b = a + 1; b < n && maxCuts >= 2; ++b)
        {
            if (valid({ a, b }))
            {
                out.push_back({ a, b });
            }
        }
    }
    return out;
}

}   // namespace

WorkloadGraph RandomWorkload(uint64_t seed, const FuzzOptions& options)
{
    std::mt19937_64 rng(seed);
    for (int attempt = 0; attempt < 1000; ++attempt)
    {
        if (auto g = TryRandomWorkload(rng, options))
        {
            return *g;
        }
    }
    throw std::runtime_error("could not generate a workload for seed " + std::to_string(seed));
}

FuzzOutcome FuzzTransformEquivalence(uint64_t firstSeed, int count, const FuzzOptions& options)
{
    FuzzOutcome outcome;
    for (int i = 0; i < count; ++i)
    {
        const uint64_t seed = firstSeed + static_cast<uint64_t>(i);
        std::string failure;
        try
        {
            WorkloadGraph g = RandomWorkload(seed, options);
            WeightSet w = MakeWeights(g, seed);
            for (ExecutionMode mode : { ExecutionMode::Batch, ExecutionMode::RealTime })
            {
                FlattenedWorkload flat = Flatten(g, mode);
                const int64_t period = flat.layers.back().interleaveOut;
                const int64_t frameCount = mode == ExecutionMode::Batch ? period : 1;
                const int64_t rows = std::max(flat.inputShape.y, frameCount - 1 + g.inputShape.y);
                std::mt19937_64 rng(seed * 31 + static_cast<uint64_t>(mode));
                Tensor stream = RandomTensor({ g.inputShape.x, rows, g.inputShape.c }, rng);
                auto frames = FramesFromStream(stream, g.inputShape.y, frameCount);
                auto reference = ExecuteReference(g, w, frames);
                Tensor out = ExecuteFlattened(flat, w, frames);
                for (int64_t r = 0; r < out.shape.y && failure.empty(); ++r)
                {
                    FrameRow fr = ReferenceRowOf(flat, r);
                    if (fr.frame >= frameCount || fr.row >= reference[static_cast<size_t>(fr.frame)].shape.y)
                    {
                        failure = "flattened row " + std::to_string(r) + " has no reference counterpart";
                        break;
                    }
                    const Tensor& ref = reference[static_cast<size_t>(fr.frame)];
                    for (int64_t x = 0; x < out.shape.x; ++x)
                    {
                        for (int64_t c = 0; c < out.shape.c; ++c)
                        {
                            if (out.At(x, r, c) != ref.At(x, fr.row, c))
                            {
                                failure = std::string(ToString(mode)) + ": flattened row " + std::to_string(r) +
                                          " differs from frame " + std::to_string(fr.frame) + " row " +
                                          std::to_string(fr.row);
                            }
                        }
                    }
                }
                if (!failure.empty())
                {
                    break;
                }
            }
        }
        catch (const std::exception& e)
        {
            failure = e.what();
        }
        if (failure.empty())
        {
            ++outcome.passed;
        }
        else
        {
            outcome.failedSeeds.push_back(seed);
            outcome.messages.push_back("seed " + std::to_string(seed) + ": " + failure);
        }
    }
    return outcome;
}

CalibrationCheck CheckCandidateAgainstOracle(const FlattenedWorkload& flat, const ScheduleCandidate& candidate,
                                             const AcceleratorSpec& hw, uint64_t seed)
{
    CalibrationCheck check;
    WeightSet w = MakeWeights(flat, seed);
    std::mt19937_64 rng(seed);
    Tensor input = RandomTensor(flat.inputShape, rng);
    Tensor expected = ExecuteFlattenedAll(flat, w, input).back();
    CostBreakdown cost = EvaluateCandidate(flat, candidate, hw);
    std::ostringstream detail;
    try
    {
        auto [out, trace] = ExecuteTiledDf(flat, w, candidate, hw, input);
        check.outputMatches = out == expected;
        if (!check.outputMatches)
        {
            detail << "tiled output differs; ";
        }
        check.peakMatches = trace.peakLiveBytes == cost.peakIoCacheBytes;
        if (!check.peakMatches)
        {
            detail << "peak " << trace.peakLiveBytes << " vs model " << cost.peakIoCacheBytes << "; ";
        }
        check.accessMatches = true;
        for (size_t i = 0; i < trace.levels.size(); ++i)
        {
            if (trace.levels[i].ioReads != cost.levels[i].ioReads || trace.levels[i].ioWrites != cost.levels[i].ioWrites)
            {
                check.accessMatches = false;
                detail << trace.levelNames[i] << " r/w " << trace.levels[i].ioReads << "/" << trace.levels[i].ioWrites
                       << " vs model " << cost.levels[i].ioReads << "/" << cost.levels[i].ioWrites << "; ";
            }
        }
        check.macsMatch = trace.executedMacs == cost.macs && trace.executedOps == cost.ops;
        if (!check.macsMatch)
        {
            detail << "macs " << trace.executedMacs << " vs model " << cost.macs << ", ops " << trace.executedOps
                   << " vs " << cost.ops << "; ";
        }
    }
    catch (const CacheMissError& e)
    {
        detail << "cache miss: " << e.what();
    }
    check.detail = detail.str();
    return check;
}

FuzzOutcome FuzzScheduleEquivalence(uint64_t firstSeed, int count, const AcceleratorSpec& hw,
                                    const FuzzOptions& options)
{
    FuzzOutcome outcome;
    for (int i = 0; i < count; ++i)
    {
        const uint64_t seed = firstSeed + static_cast<uint64_t>(i);
        std::string failure;
        try
        {
            WorkloadGraph g = RandomWorkload(seed, options);
            for (ExecutionMode mode : { ExecutionMode::Batch, ExecutionMode::RealTime, ExecutionMode::Baseline })
            {
                FlattenedWorkload flat = Flatten(g, mode);
                std::mt19937_64 rng(seed * 131 + static_cast<uint64_t>(mode));
                auto cutSets = ValidCutSets(flat, 2);
                ScheduleCandidate cand;
                cand.cuts = cutSets[static_cast<size_t>(Pick(rng, 0, static_cast<int64_t>(cutSets.size()) - 1))];
                for (const auto& s : SubStacksOf(cand.cuts, static_cast<int>(flat.layers.size())))
                {
                    TileConfig space = ExitTileSpace(flat, s);
                    cand.tiles.push_back({ Pick(rng, 1, space.tx), Pick(rng, 1, space.ty) });
                }
                for (size_t b = 0; b < cand.cuts.size(); ++b)
                {
                    cand.dramSkip.push_back(Unit(rng) < 0.5);
                }
                CalibrationCheck chk;
                try
                {
                    chk = CheckCandidateAgainstOracle(flat, cand, hw, seed);
                }
                catch (const OnChipOverflow&)
                {
                    continue;
                }
                if (!chk.Ok())
                {
                    failure = std::string(ToString(mode)) + " " + EncodeCandidate(cand) + ": " + chk.detail;
                    break;
                }
            }
        }
        catch (const std::exception& e)
        {
            failure = e.what();
        }
        if (failure.empty())
        {
            ++outcome.passed;
        }
        else
        {
            outcome.failedSeeds.push_back(seed);
            outcome.messages.push_back("seed " + std::to_string(seed) + ": " + failure);
        }
    }
    return outcome;
}

}   // namespace causalflow
