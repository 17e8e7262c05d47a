//
// Copyright © 2026 The causalflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "causalflow/transform.hpp"

#include <json.hpp>

#include <algorithm>
#include <numeric>

namespace causalflow
{

std::string_view ToString(ExecutionMode mode)
{
    switch (mode)
    {
        case ExecutionMode::Baseline:
            return "baseline";
        case ExecutionMode::RealTime:
            return "realtime";
        case ExecutionMode::Batch:
            return "batch";
    }
    return "?";
}

ExecutionMode ParseExecutionMode(std::string_view text)
{
    if (text == "baseline")
    {
        return ExecutionMode::Baseline;
    }
    if (text == "realtime" || text == "real-time")
    {
        return ExecutionMode::RealTime;
    }
    if (text == "batch")
    {
        return ExecutionMode::Batch;
    }
    throw ConfigError("unknown execution mode '" + std::string(text) + "'");
}

StrideDilation StrideToDilation(int64_t inputStride, int64_t layerStride, int64_t layerDilation,
                                int64_t interleaveIn)
{
    StrideDilation out;
    out.stride = std::gcd(inputStride, layerStride);
    if (interleaveIn % out.stride != 0)
    {
        throw ConfigError("interleave factor " + std::to_string(interleaveIn) + " is not divisible by stride " +
                          std::to_string(out.stride));
    }
    int64_t frames = interleaveIn / out.stride;
    out.dilation = frames * layerDilation;
    out.interleaveOut = frames * layerStride;
    return out;
}

AxisWindow FlattenedLayer::WindowX() const
{
    return { base.kernelX, base.strideX, base.dilationX, base.padLeft };
}

AxisWindow FlattenedLayer::WindowY() const
{
    return { base.kernelY, newStrideY, newDilationY, base.padTop };
}

const TensorShape& FlattenedWorkload::TensorOf(int producer) const
{
    return producer == kNetworkInput ? inputShape : layers.at(static_cast<size_t>(producer)).outShape;
}

std::vector<std::vector<int>> FlattenedWorkload::Consumers() const
{
    std::vector<std::vector<int>> out(layers.size());
    for (size_t i = 0; i < layers.size(); ++i)
    {
        for (int p : layers[i].inputs)
        {
            if (p != kNetworkInput)
            {
                out[static_cast<size_t>(p)].push_back(static_cast<int>(i));
            }
        }
    }
    return out;
}

WorkloadGraph FlattenedWorkload::AsGraph() const
{
    WorkloadGraph g;
    g.inputShape = inputShape;
    g.weightBits = weightBits;
    g.activationBits = activationBits;
    for (const auto& l : layers)
    {
        LayerSpec spec = l.base;
        spec.strideY = l.newStrideY;
        spec.dilationY = l.newDilationY;
        g.layers.push_back(spec);
    }
    return g;
}

namespace
{

/// Number of rows of the producer needed for `rows` output rows, counted from row 0.
int64_t RowsNeeded(const FlattenedLayer& l, int64_t rows)
{
    if (rows <= 0)
    {
        return 0;
    }
    if (l.base.kind == LayerKind::ElementwiseAdd)
    {
        return rows;
    }
    AxisWindow w = l.WindowY();
    return std::max<int64_t>(0, (rows - 1) * w.stride + (w.kernel - 1) * w.dilation - w.padLo + 1);
}

}   // namespace

std::vector<int64_t> PredecessorProductDilations(const WorkloadGraph& graph)
{
    // Product of the original temporal strides of all layers upstream of each layer; along
    // a join every path carries the same product, so the first operand is representative.
    std::vector<int64_t> upstream(graph.layers.size(), 1);
    std::vector<int64_t> dilations(graph.layers.size(), 1);
    for (size_t i = 0; i < graph.layers.size(); ++i)
    {
        const LayerSpec& l = graph.layers[i];
        int p = l.predecessors.front() == kNetworkInput ? -1 : graph.IndexOf(l.predecessors.front());
        int64_t product = p < 0 ? 1 : upstream[static_cast<size_t>(p)] * graph.layers[static_cast<size_t>(p)].strideY;
        upstream[i] = product;
        dilations[i] = l.dilationY * product;
    }
    return dilations;
}

FlattenedWorkload Flatten(const WorkloadGraph& graph, ExecutionMode mode)
{
    auto diags = ValidateGraph(graph);
    if (!diags.empty())
    {
        throw ConfigError("cannot flatten an invalid graph: layer " + std::to_string(diags.front().layerId) + ": " +
                          diags.front().message);
    }
    auto shapes = InferShapes(graph);

    FlattenedWorkload flat;
    flat.mode = mode;
    flat.inputShape = graph.inputShape;
    flat.weightBits = graph.weightBits;
    flat.activationBits = graph.activationBits;
    flat.inputStride = 1;

    const bool causal = mode != ExecutionMode::Baseline;
    for (size_t i = 0; i < graph.layers.size(); ++i)
    {
        const LayerSpec& spec = graph.layers[i];
        FlattenedLayer fl;
        fl.base = spec;
        for (int p : spec.predecessors)
        {
            fl.inputs.push_back(p == kNetworkInput ? kNetworkInput : graph.IndexOf(p));
        }
        auto interleaveOf = [&](int producer) -> int64_t {
            return producer == kNetworkInput ? 1 : flat.layers[static_cast<size_t>(producer)].interleaveOut;
        };
        fl.interleaveIn = interleaveOf(fl.inputs.front());
        for (int p : fl.inputs)
        {
            if (interleaveOf(p) != fl.interleaveIn)
            {
                throw ConfigError("layer " + std::to_string(spec.id) + ": interleave mismatch at join (" +
                                  std::to_string(interleaveOf(p)) + " vs " + std::to_string(fl.interleaveIn) + ")");
            }
        }
        StrideDilation sd = StrideToDilation(flat.inputStride, spec.strideY, spec.dilationY, fl.interleaveIn);
        fl.interleaveOut = sd.interleaveOut;
        if (causal)
        {
            if (spec.padTop != 0 || spec.padBottom != 0)
            {
                throw ConfigError("layer " + std::to_string(spec.id) +
                                  ": temporal padding cannot be carried into a causal flattened workload");
            }
            fl.newStrideY = sd.stride;
            fl.newDilationY = sd.dilation;
        }
        else
        {
            fl.newStrideY = spec.strideY;
            fl.newDilationY = spec.dilationY;
        }
        fl.inChannels = shapes[i].inputs.front().c;
        fl.outShape = shapes[i].output;
        flat.layers.push_back(std::move(fl));
    }

    flat.stridePeriod = flat.layers.back().interleaveOut;
    const TensorShape sinkShape = shapes.back().output;
    if (mode == ExecutionMode::Baseline)
    {
        flat.framesPerInvocation = flat.stridePeriod;
        return flat;
    }

    // Size every temporal extent backwards from the rows the sink has to emit.
    const int64_t sinkRows = mode == ExecutionMode::RealTime ? 1 : sinkShape.y * flat.stridePeriod;
    std::vector<int64_t> rows(flat.layers.size(), 0);
    int64_t inputRows = 0;
    rows.back() = sinkRows;
    for (size_t k = flat.layers.size(); k-- > 0;)
    {
        int64_t need = RowsNeeded(flat.layers[k], rows[k]);
        for (int p : flat.layers[k].inputs)
        {
            int64_t& slot = p == kNetworkInput ? inputRows : rows[static_cast<size_t>(p)];
            slot = std::max(slot, need);
        }
    }
    for (size_t k = 0; k < flat.layers.size(); ++k)
    {
        flat.layers[k].outShape.y = rows[k];
    }
    flat.inputShape.y = inputRows;
    flat.framesPerInvocation = 1;
    return flat;
}

ModeGeometry ComputeModeGeometry(const WorkloadGraph& graph, ExecutionMode mode)
{
    auto shapes = InferShapes(graph);
    const TensorShape& out = shapes.back().output;
    int64_t period = 1;
    // Interleave of the sink equals the stride product along any input-to-sink path.
    for (int idx = static_cast<int>(graph.layers.size()) - 1; idx >= 0;)
    {
        const LayerSpec& l = graph.layers[static_cast<size_t>(idx)];
        period *= l.strideY;
        int p = l.predecessors.front();
        idx = p == kNetworkInput ? -1 : graph.IndexOf(p);
    }
    switch (mode)
    {
        case ExecutionMode::Baseline:
            return { out.x, out.y, period };
        case ExecutionMode::RealTime:
            return { out.x, 1, 1 };
        case ExecutionMode::Batch:
            return { out.x, out.y * period, 1 };
    }
    return {};
}

int64_t FlattenedInputWindow(const FlattenedWorkload& flat, int64_t newRows)
{
    if (newRows <= 0 || flat.layers.empty())
    {
        return 0;
    }
    std::vector<int64_t> rows(flat.layers.size(), 0);
    int64_t inputRows = 0;
    rows.back() = newRows;
    for (size_t k = flat.layers.size(); k-- > 0;)
    {
        int64_t need = RowsNeeded(flat.layers[k], rows[k]);
        for (int p : flat.layers[k].inputs)
        {
            int64_t& slot = p == kNetworkInput ? inputRows : rows[static_cast<size_t>(p)];
            slot = std::max(slot, need);
        }
    }
    return inputRows;
}

std::string SerializeFlattened(const FlattenedWorkload& flat)
{
    auto doc = nlohmann::ordered_json::parse(SerializeWorkload(flat.AsGraph()));
    auto& layers = doc["layers"];
    for (size_t i = 0; i < flat.layers.size(); ++i)
    {
        layers[i]["interleave"] = { { "in", flat.layers[i].interleaveIn }, { "out", flat.layers[i].interleaveOut } };
    }
    return doc.dump(2) + "\n";
}

}   // namespace causalflow
