//
// Copyright © 2026 The causalflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "causalflow/geometry.hpp"
#include "causalflow/workload.hpp"

#include <string>
#include <vector>

namespace causalflow
{

enum class ExecutionMode
{
    Baseline,   // original graph, one frame at a time
    RealTime,   // one new flattened output row, caches pre-filled
    Batch,      // whole flattened sequence covering one interleave period
};

std::string_view ToString(ExecutionMode mode);
ExecutionMode ParseExecutionMode(std::string_view text);

/// Result of rewriting one layer's temporal stride into a dilation.
struct StrideDilation
{
    int64_t stride = 1;
    int64_t dilation = 1;
    int64_t interleaveOut = 1;
};

/// General rewrite for a global input stride `inputStride`. Throws ConfigError when the
/// interleave factor is not divisible by the new stride.
StrideDilation StrideToDilation(int64_t inputStride, int64_t layerStride, int64_t layerDilation,
                                int64_t interleaveIn);

struct FlattenedLayer
{
    LayerSpec base;
    int64_t newStrideY = 1;
    int64_t newDilationY = 1;
    int64_t interleaveIn = 1;
    int64_t interleaveOut = 1;
    std::vector<int> inputs;   // producer indices, kNetworkInput for the network input
    TensorShape outShape;

    AxisWindow WindowX() const;
    AxisWindow WindowY() const;
    /// Channels of the first operand.
    int64_t inChannels = 1;
};

/// Workload in the geometry a given execution mode actually runs. In Baseline mode the
/// layers keep their original temporal strides; otherwise every temporal stride is 1 and
/// the temporal extents are sized to exactly what the sink output needs.
struct FlattenedWorkload
{
    std::vector<FlattenedLayer> layers;
    ExecutionMode mode = ExecutionMode::Batch;
    TensorShape inputShape;
    int64_t inputStride = 1;   // normalized global input stride
    int64_t framesPerInvocation = 1;
    int64_t stridePeriod = 1;   // product of original temporal strides along the sink path
    int weightBits = 8;
    int activationBits = 8;

    int SinkIndex() const { return static_cast<int>(layers.size()) - 1; }
    const TensorShape& TensorOf(int producer) const;
    std::vector<std::vector<int>> Consumers() const;
    /// Equivalent workload graph (flattened geometry), suitable for serialization.
    WorkloadGraph AsGraph() const;
};

struct ModeGeometry
{
    int64_t spatialOut = 0;
    int64_t temporalOut = 0;
    int64_t framesPerInvocation = 1;
};

FlattenedWorkload Flatten(const WorkloadGraph& graph, ExecutionMode mode);

/// Per-mode output geometry of the sink.
ModeGeometry ComputeModeGeometry(const WorkloadGraph& graph, ExecutionMode mode);

/// New temporal dilation of every layer from the closed-form product of predecessor strides
/// (the rewrite with the input stride fixed to 1).
std::vector<int64_t> PredecessorProductDilations(const WorkloadGraph& graph);

/// Temporal extent of the network input needed to produce `newRows` sink rows.
int64_t FlattenedInputWindow(const FlattenedWorkload& flat, int64_t newRows);

/// JSON workload document with an `interleave` annotation on each layer.
std::string SerializeFlattened(const FlattenedWorkload& flat);

}   // namespace causalflow
