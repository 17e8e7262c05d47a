//
// Copyright © 2026 The causalflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "test_support.hpp"

#include "causalflow/oracle.hpp"
#include "causalflow/transform.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace causalflow;
using namespace causalflow::test;

namespace
{

// Product form: dilation_k = D_k * prod of the temporal strides of every layer before k on the chain.
std::vector<int64_t> ChainProductDilations(const WorkloadGraph& chain)
{
    std::vector<int64_t> out;
    int64_t product = 1;
    for (const auto& l : chain.layers)
    {
        out.push_back(l.dilationY * product);
        product *= l.strideY;
    }
    return out;
}

WorkloadGraph RandomChain(std::mt19937_64& rng, int depth)
{
    std::uniform_int_distribution<int> pick(0, 2);
    const int64_t strides[] = { 1, 2, 4 };
    std::vector<LayerSpec> layers;
    int64_t need = 1;
    for (int i = 1; i <= depth; ++i)
    {
        const int64_t s = strides[pick(rng)];
        const int64_t d = 1 + pick(rng) % 2;
        if (i % 2 == 0)
        {
            layers.push_back(Pool(i, 1, 2, 1, s));
        }
        else
        {
            layers.push_back(Conv(i, 2, 1, 3, s, d));
        }
    }
    // Size the input so every layer keeps at least one output row.
    for (auto it = layers.rbegin(); it != layers.rend(); ++it)
    {
        need = (need - 1) * it->strideY + (it->kernelY - 1) * it->dilationY + 1;
    }
    return Graph({ 2, need, 1 }, layers);
}

}   // namespace

TEST(Transform, StridedChainRewrite)
{
    FlattenedWorkload flat = Flatten(Fig5Chain(), ExecutionMode::Batch);
    ASSERT_EQ(flat.layers.size(), 3u);
    std::vector<int64_t> strides, dilations, interleave;
    for (const auto& l : flat.layers)
    {
        strides.push_back(l.newStrideY);
        dilations.push_back(l.newDilationY);
        interleave.push_back(l.interleaveOut);
    }
    EXPECT_EQ(strides, (std::vector<int64_t>{ 1, 1, 1 }));
    EXPECT_EQ(dilations, (std::vector<int64_t>{ 1, 2, 4 }));
    EXPECT_EQ(interleave, (std::vector<int64_t>{ 2, 4, 4 }));
    EXPECT_EQ(dilations, ChainProductDilations(Fig5Chain()));
    EXPECT_EQ(PredecessorProductDilations(Fig5Chain()), dilations);
}

TEST(Transform, StrideOneIsIdentity)
{
    WorkloadGraph g = Graph({ 5, 9, 2 }, { Conv(1, 2, 3, 3), Pool(2, 2, 2, 1, 1), Conv(3, 1, 1, 2) });
    for (ExecutionMode mode : { ExecutionMode::Batch, ExecutionMode::RealTime, ExecutionMode::Baseline })
    {
        FlattenedWorkload flat = Flatten(g, mode);
        for (size_t i = 0; i < g.layers.size(); ++i)
        {
            EXPECT_EQ(flat.layers[i].newStrideY, 1);
            EXPECT_EQ(flat.layers[i].newDilationY, g.layers[i].dilationY);
            EXPECT_EQ(flat.layers[i].interleaveOut, 1);
        }
    }
    FlattenedWorkload batch = Flatten(g, ExecutionMode::Batch);
    EXPECT_EQ(batch.AsGraph().layers, g.layers);
    EXPECT_EQ(batch.layers.back().outShape, InferShapes(g).back().output);
}

TEST(Transform, PoolStrideDoublesDownstreamDilation)
{
    WorkloadGraph g = Graph({ 1, 10, 1 }, { Pool(1, 1, 2, 1, 2), Conv(2, 1, 1, 3) });
    FlattenedWorkload flat = Flatten(g, ExecutionMode::Batch);
    EXPECT_EQ(flat.layers[0].newDilationY, 1);
    EXPECT_EQ(flat.layers[1].newDilationY, 2 * g.layers[1].dilationY);
}

TEST(Transform, GeneralStrideRule)
{
    StrideDilation sd = StrideToDilation(2, 4, 1, 2);
    EXPECT_EQ(sd.stride, 2);
    EXPECT_EQ(sd.interleaveOut, 2 * 4 / 2);
    sd = StrideToDilation(1, 2, 3, 4);
    EXPECT_EQ(sd.stride, 1);
    EXPECT_EQ(sd.dilation, 3 * 4);
    EXPECT_EQ(sd.interleaveOut, 8);
    EXPECT_THROW(StrideToDilation(2, 2, 1, 1), ConfigError);
}

TEST(Transform, ModeGeometryTable)
{
    // Four (1,2)/(1,2) pools: product of strides 16, original output 16x16.
    WorkloadGraph g = Graph({ 16, 256, 1 },
                            { Pool(1, 1, 2, 1, 2), Pool(2, 1, 2, 1, 2), Pool(3, 1, 2, 1, 2), Pool(4, 1, 2, 1, 2) });
    ASSERT_EQ(InferShapes(g).back().output, (TensorShape{ 16, 16, 1 }));
    ModeGeometry batch = ComputeModeGeometry(g, ExecutionMode::Batch);
    EXPECT_EQ(batch.spatialOut, 16);
    EXPECT_EQ(batch.temporalOut, 256);
    ModeGeometry rt = ComputeModeGeometry(g, ExecutionMode::RealTime);
    EXPECT_EQ(rt.temporalOut, 1);
    EXPECT_EQ(rt.framesPerInvocation, 1);
    ModeGeometry base = ComputeModeGeometry(g, ExecutionMode::Baseline);
    EXPECT_EQ(base.temporalOut, 16);
    EXPECT_EQ(base.framesPerInvocation, 16);

    WorkloadGraph unit = Graph({ 4, 9, 1 }, { Conv(1, 1, 1, 3) });
    EXPECT_EQ(ComputeModeGeometry(unit, ExecutionMode::Batch).temporalOut, 7);
}

TEST(Transform, FlattenedInputWindow)
{
    FlattenedWorkload one = Flatten(Graph({ 1, 8, 1 }, { Conv(1, 1, 1, 3) }), ExecutionMode::Batch);
    EXPECT_EQ(FlattenedInputWindow(one, 1), 3);
    EXPECT_EQ(FlattenedInputWindow(one, 0), 0);
    FlattenedWorkload two =
        Flatten(Graph({ 1, 16, 1 }, { Conv(1, 1, 1, 3, 1, 4), Conv(2, 1, 1, 3) }), ExecutionMode::Batch);
    EXPECT_EQ(FlattenedInputWindow(two, 1), 3 + (3 - 1) * 4);
}

TEST(Transform, FlattenedInputWindowMatchesMarking)
{
    // Mark the input rows a single sink row reaches, layer by layer.
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 30; ++trial)
    {
        WorkloadGraph g = RandomChain(rng, 1 + trial % 4);
        FlattenedWorkload flat = Flatten(g, ExecutionMode::Batch);
        std::vector<bool> need(static_cast<size_t>(flat.layers.back().outShape.y), false);
        need.back() = true;
        for (int i = flat.SinkIndex(); i >= 0; --i)
        {
            const auto& l = flat.layers[static_cast<size_t>(i)];
            const int64_t inY = i == 0 ? flat.inputShape.y : flat.layers[static_cast<size_t>(i - 1)].outShape.y;
            std::vector<bool> prev(static_cast<size_t>(inY), false);
            for (size_t r = 0; r < need.size(); ++r)
            {
                if (!need[r])
                    continue;
                for (int64_t t = 0; t < l.base.kernelY; ++t)
                {
                    prev[static_cast<size_t>(static_cast<int64_t>(r) * l.newStrideY + t * l.newDilationY)] = true;
                }
            }
            need = prev;
        }
        int64_t lo = -1, hi = -1;
        for (size_t r = 0; r < need.size(); ++r)
        {
            if (need[r])
            {
                hi = static_cast<int64_t>(r);
                if (lo < 0)
                    lo = hi;
            }
        }
        EXPECT_EQ(FlattenedInputWindow(flat, 1), hi - lo + 1) << SerializeWorkload(g);
    }
}

TEST(Transform, ProductRuleMatchesRecursiveRule)
{
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial)
    {
        WorkloadGraph g = RandomChain(rng, 1 + trial % 6);
        FlattenedWorkload flat = Flatten(g, ExecutionMode::Batch);
        const auto expect = ChainProductDilations(g);
        ASSERT_EQ(PredecessorProductDilations(g), expect);
        int64_t product = 1;
        for (size_t i = 0; i < g.layers.size(); ++i)
        {
            EXPECT_EQ(flat.layers[i].newDilationY, expect[i]);
            EXPECT_EQ(flat.layers[i].newStrideY, 1);
            product *= g.layers[i].strideY;
        }
        EXPECT_EQ(flat.layers.back().interleaveOut, product);
        EXPECT_EQ(flat.stridePeriod, product);
    }
}

TEST(Transform, FlattenIsIdempotent)
{
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial)
    {
        WorkloadGraph g = RandomChain(rng, 1 + trial % 5);
        FlattenedWorkload once = Flatten(g, ExecutionMode::Batch);
        FlattenedWorkload twice = Flatten(once.AsGraph(), ExecutionMode::Batch);
        ASSERT_EQ(twice.layers.size(), once.layers.size());
        for (size_t i = 0; i < once.layers.size(); ++i)
        {
            EXPECT_EQ(twice.layers[i].newDilationY, once.layers[i].newDilationY);
            EXPECT_EQ(twice.layers[i].outShape, once.layers[i].outShape);
        }
        EXPECT_EQ(twice.AsGraph().layers, once.AsGraph().layers);
    }
}

TEST(Transform, ResidualJoinNeedsMatchingInterleave)
{
    // Branch 1 strides by 2, branch 2 does not: the join cannot interleave consistently.
    LayerSpec a = Conv(1, 1, 1, 1, 2);
    LayerSpec b = Conv(2, 1, 1, 1, 1, 1, { kNetworkInput });
    LayerSpec pool = Pool(3, 1, 2, 1, 2, { 2 });
    WorkloadGraph g = Graph({ 1, 8, 1 }, { a, b, pool, Add(4, 1, 3) });
    ASSERT_TRUE(ValidateGraph(g).empty());
    EXPECT_NO_THROW(Flatten(g, ExecutionMode::Batch));

    WorkloadGraph bad = Graph({ 1, 8, 1 }, { Conv(1, 1, 1, 1, 2), Conv(2, 1, 1, 5, 1, 1, { kNetworkInput }) });
    bad.layers.push_back(Add(3, 1, 2));
    ASSERT_TRUE(ValidateGraph(bad).empty());
    EXPECT_THROW(Flatten(bad, ExecutionMode::Batch), ConfigError);
}

TEST(Transform, FourFrameEquivalence)
{
    WorkloadGraph g = Graph({ 2, 12, 1 }, { Conv(1, 2, 1, 3, 2), Pool(2, 1, 2, 1, 2), Conv(3, 1, 2, 1) });
    FlattenedWorkload flat = Flatten(g, ExecutionMode::Batch);
    ASSERT_EQ(flat.framesPerInvocation, 1);
    ASSERT_EQ(flat.layers.back().interleaveOut, 4);
    WeightSet w = MakeWeights(g, 9);
    std::mt19937_64 rng(9);
    Tensor stream = RandomTensor({ 2, 4 - 1 + 12, 1 }, rng);
    auto frames = FramesFromStream(stream, 12, 4);
    auto reference = ExecuteReference(g, w, frames);
    Tensor out = ExecuteFlattened(flat, w, frames);
    ASSERT_EQ(out.shape.y, 4 * reference[0].shape.y);
    for (int64_t r = 0; r < out.shape.y; ++r)
    {
        FrameRow fr = ReferenceRowOf(flat, r);
        for (int64_t x = 0; x < out.shape.x; ++x)
        {
            EXPECT_EQ(out.At(x, r, 0), reference[static_cast<size_t>(fr.frame)].At(x, fr.row, 0));
        }
    }
}

TEST(Transform, FuzzEquivalenceSample)
{
    FuzzOutcome o = FuzzTransformEquivalence(1000, 25);
    EXPECT_EQ(o.passed, 25);
    for (const auto& m : o.messages)
    {
        ADD_FAILURE() << m;
    }
}

TEST(Transform, InsufficientFramesRejected)
{
    FlattenedWorkload flat = Flatten(Fig5Chain(), ExecutionMode::Batch);
    WeightSet w = MakeWeights(flat, 1);
    std::mt19937_64 rng(1);
    std::vector<Tensor> frames = { RandomTensor({ 1, 17, 1 }, rng) };
    EXPECT_THROW(ExecuteFlattened(flat, w, frames), std::invalid_argument);
}
