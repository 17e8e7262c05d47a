//
// Copyright © 2026 The causalflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "test_support.hpp"

#include "causalflow/oracle.hpp"
#include "causalflow/schedule.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace causalflow;
using namespace causalflow::test;

namespace
{

AcceleratorSpec Meta()
{
    return PresetAccelerator("meta-edge-like");
}

// Straight-line recomputation of the 1-wide Conv3(s2) -> MaxPool2(s2) -> Conv3 chain.
std::vector<int64_t> Fig5ByHand(const std::vector<int64_t>& in, const WeightSet& w)
{
    std::vector<int64_t> a, b, c;
    for (size_t y = 0; y + 2 < in.size(); y += 2)
        a.push_back(w[0][0] * in[y] + w[0][1] * in[y + 1] + w[0][2] * in[y + 2]);
    for (size_t y = 0; y + 1 < a.size(); y += 2)
        b.push_back(std::max(a[y], a[y + 1]));
    for (size_t y = 0; y + 2 < b.size(); ++y)
        c.push_back(w[2][0] * b[y] + w[2][1] * b[y + 1] + w[2][2] * b[y + 2]);
    return c;
}

ScheduleCandidate Whole(const FlattenedWorkload& flat, TileConfig tile)
{
    ScheduleCandidate c;
    c.tiles = { ClampTile(flat, { 0, flat.SinkIndex() }, tile) };
    return c;
}

}   // namespace

TEST(Oracle, IdentityConv)
{
    WorkloadGraph g = Graph({ 3, 4, 1 }, { Conv(1, 1, 1, 1) });
    WeightSet w = { { 1 } };
    std::mt19937_64 rng(1);
    Tensor frame = RandomTensor(g.inputShape, rng);
    auto out = ExecuteReference(g, w, { frame });
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0], frame);
}

TEST(Oracle, AllOnesConv)
{
    const int64_t channels = 5;
    WorkloadGraph g = Graph({ 2, 6, channels }, { Conv(1, 2, 1, 3) });
    WeightSet w = { std::vector<int64_t>(static_cast<size_t>(2 * channels * 3), 1) };
    Tensor frame({ 2, 6, channels });
    std::fill(frame.values.begin(), frame.values.end(), 1);
    Tensor out = ExecuteReference(g, w, { frame })[0];
    ASSERT_EQ(out.shape, (TensorShape{ 2, 4, 2 }));
    for (int64_t v : out.values)
    {
        EXPECT_EQ(v, 3 * channels);
    }
}

TEST(Oracle, Fig5ChainMatchesHandComputation)
{
    WorkloadGraph g = Fig5Chain();
    WeightSet w = MakeWeights(g, 21);
    std::mt19937_64 rng(21);
    Tensor frame = RandomTensor(g.inputShape, rng);
    Tensor out = ExecuteReference(g, w, { frame })[0];
    std::vector<int64_t> in(frame.values.begin(), frame.values.end());
    EXPECT_EQ(out.values, Fig5ByHand(in, w));
    EXPECT_EQ(out.shape, (TensorShape{ 1, 2, 1 }));
}

TEST(Oracle, FramesRoundTrip)
{
    std::mt19937_64 rng(2);
    Tensor stream = RandomTensor({ 3, 10, 2 }, rng);
    auto frames = FramesFromStream(stream, 6, 5);
    ASSERT_EQ(frames.size(), 5u);
    for (int64_t f = 0; f < 5; ++f)
        for (int64_t y = 0; y < 6; ++y)
            EXPECT_EQ(frames[static_cast<size_t>(f)].At(1, y, 1), stream.At(1, y + f, 1));
    EXPECT_EQ(StreamFromFrames(frames, 10), stream);
    EXPECT_THROW(StreamFromFrames(frames, 11), std::invalid_argument);
}

TEST(Oracle, FullTileSingleTileMatchesFlattened)
{
    for (const auto& name : SuiteWorkloads())
    {
        FlattenedWorkload flat = Flatten(LoadWorkload(DeskWorkloadPath(name)), ExecutionMode::Batch);
        WeightSet w = MakeWeights(flat, 4);
        std::mt19937_64 rng(4);
        Tensor input = RandomTensor(flat.inputShape, rng);
        auto [out, trace] = ExecuteTiledDf(flat, w, Whole(flat, { 1 << 20, 1 << 20 }), Meta(), input);
        EXPECT_EQ(out, ExecuteFlattenedAll(flat, w, input).back()) << name;
        EXPECT_EQ(trace.executedMacs, CountMacsExecuted(trace));
    }
}

TEST(Oracle, RowTilesShrinkLiveSet)
{
    FlattenedWorkload flat = Flatten(Fig5Chain(), ExecutionMode::Batch);
    WeightSet w = MakeWeights(flat, 8);
    std::mt19937_64 rng(8);
    Tensor input = RandomTensor(flat.inputShape, rng);
    const TileConfig exit = ExitTileSpace(flat, { 0, flat.SinkIndex() });
    auto [full, fullTrace] = ExecuteTiledDf(flat, w, Whole(flat, exit), Meta(), input);
    auto [rows, rowTrace] = ExecuteTiledDf(flat, w, Whole(flat, { exit.tx, 1 }), Meta(), input);
    EXPECT_EQ(full, rows);
    EXPECT_LT(rowTrace.peakLiveBytes, fullTrace.peakLiveBytes);
    EXPECT_EQ(CountMacsExecuted(rowTrace), CountMacsExecuted(fullTrace));
}

TEST(Oracle, SingleMac)
{
    FlattenedWorkload flat = Flatten(Graph({ 1, 1, 1 }, { Conv(1, 1, 1, 1) }), ExecutionMode::Batch);
    WeightSet w = MakeWeights(flat, 1);
    std::mt19937_64 rng(1);
    auto trace = ExecuteTiledDf(flat, w, Whole(flat, { 1, 1 }), Meta(), RandomTensor(flat.inputShape, rng)).second;
    EXPECT_EQ(CountMacsExecuted(trace), 1);
}

TEST(Oracle, RealTimeComputesOneRowPerLayer)
{
    // Stride-1 chain: a RealTime update produces exactly one new row of every layer.
    WorkloadGraph g = Graph({ 6, 12, 2 }, { Conv(1, 3, 3, 3), Conv(2, 2, 1, 3, 1, 2), Conv(3, 1, 2, 2) });
    FlattenedWorkload rt = Flatten(g, ExecutionMode::RealTime);
    auto shapes = InferShapes(g);
    int64_t perRow = 0;
    int64_t perFrame = 0;
    for (size_t i = 0; i < g.layers.size(); ++i)
    {
        const LayerSpec& l = g.layers[i];
        const int64_t macsPerPos = l.outChannels * shapes[i].inputs[0].c * l.kernelX * l.kernelY;
        perRow += shapes[i].output.x * macsPerPos;
        perFrame += shapes[i].output.x * shapes[i].output.y * macsPerPos;
    }
    WeightSet w = MakeWeights(rt, 3);
    std::mt19937_64 rng(3);
    Tensor input = RandomTensor(rt.inputShape, rng);
    auto [out, trace] = ExecuteTiledDf(rt, w, Whole(rt, { 1 << 20, 1 }), Meta(), input);
    EXPECT_EQ(out, ExecuteFlattenedAll(rt, w, input).back());
    EXPECT_EQ(CountMacsExecuted(trace), perRow);
    EXPECT_EQ(MacCount(g), perFrame);
    EXPECT_EQ(EvaluateCandidate(rt, Whole(rt, { 1 << 20, 1 }), Meta()).macs, perRow);

    FlattenedWorkload base = Flatten(g, ExecutionMode::Baseline);
    auto baseTrace =
        ExecuteTiledDf(base, MakeWeights(base, 3), Whole(base, { 1 << 20, 1 << 20 }), Meta(),
                       RandomTensor(base.inputShape, rng))
            .second;
    EXPECT_EQ(CountMacsExecuted(baseTrace) / base.framesPerInvocation, perFrame);
}

TEST(Oracle, MacCountsAgreeAcrossTilings)
{
    FuzzOptions opt;
    opt.contiguousTaps = true;
    for (uint64_t seed = 100; seed < 130; ++seed)
    {
        FlattenedWorkload flat = Flatten(RandomWorkload(seed, opt), ExecutionMode::Batch);
        WeightSet w = MakeWeights(flat, seed);
        std::mt19937_64 rng(seed);
        Tensor input = RandomTensor(flat.inputShape, rng);
        int64_t first = -1;
        for (TileConfig t : { TileConfig{ 1, 1 }, TileConfig{ 3, 2 }, TileConfig{ 1 << 20, 1 << 20 } })
        {
            const int64_t macs = CountMacsExecuted(ExecuteTiledDf(flat, w, Whole(flat, t), Meta(), input).second);
            if (first < 0)
                first = macs;
            EXPECT_EQ(macs, first) << "seed " << seed;
        }
    }
}

TEST(Oracle, ScheduleFuzzSample)
{
    FuzzOutcome o = FuzzScheduleEquivalence(500, 20, Meta());
    EXPECT_EQ(o.passed, 20);
    for (const auto& m : o.messages)
    {
        ADD_FAILURE() << m;
    }
}

TEST(Oracle, BaselineMacsPerFrameMatchGraphCount)
{
    // Full-frame execution of the original geometry computes every output position of
    // every layer when windows leave no gaps and all columns are consumed.
    for (const auto& name : SuiteWorkloads())
    {
        WorkloadGraph g = LoadWorkload(DeskWorkloadPath(name));
        FlattenedWorkload base = Flatten(g, ExecutionMode::Baseline);
        WeightSet w = MakeWeights(base, 6);
        std::mt19937_64 rng(6);
        auto trace = ExecuteTiledDf(base, w, Whole(base, { 1 << 20, 1 << 20 }), Meta(),
                                    RandomTensor(base.inputShape, rng))
                         .second;
        std::vector<TensorShape> regions;
        for (size_t i = 0; i < base.layers.size(); ++i)
            regions.push_back({ trace.producedCols[i].Size(), trace.producedRows[i].Size(), 1 });
        EXPECT_EQ(CountMacsExecuted(trace), MacCount(base.AsGraph(), regions) * base.framesPerInvocation) << name;
        EXPECT_LE(CountMacsExecuted(trace) / base.framesPerInvocation, MacCount(g)) << name;
    }
}
