//
// Copyright © 2026 The causalflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace causalflow
{

/// Raised for malformed or semantically invalid configuration documents.
class ConfigError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Feature-map extents. X is the spatial axis, Y the temporal axis.
struct TensorShape
{
    int64_t x = 1;
    int64_t y = 1;
    int64_t c = 1;

    int64_t Elements() const { return x * y * c; }
    bool operator==(const TensorShape&) const = default;
};

enum class LayerKind
{
    Conv,
    Pool,
    ElementwiseAdd,
};

std::string_view ToString(LayerKind kind);

/// Predecessor id referring to the network input tensor.
inline constexpr int kNetworkInput = -1;

/// One sliding-window layer. Pairs are (X, Y); padding is (left, right, top, bottom).
struct LayerSpec
{
    int id = 0;
    LayerKind kind = LayerKind::Conv;
    int64_t outChannels = 0;   // Conv only
    int64_t kernelX = 1;
    int64_t kernelY = 1;
    int64_t strideX = 1;
    int64_t strideY = 1;
    int64_t dilationX = 1;
    int64_t dilationY = 1;
    int64_t padLeft = 0;
    int64_t padRight = 0;
    int64_t padTop = 0;
    int64_t padBottom = 0;
    std::vector<int> predecessors;

    bool operator==(const LayerSpec&) const = default;
};

struct WorkloadGraph
{
    TensorShape inputShape;
    std::vector<LayerSpec> layers;   // topological order
    int weightBits = 8;
    int activationBits = 8;

    /// Position of the layer with the given id in `layers`, or -1.
    int IndexOf(int id) const;
    /// Index of the unique layer without consumers.
    int SinkIndex() const;
    /// For each layer index, the indices of layers consuming it.
    std::vector<std::vector<int>> Consumers() const;
};

struct LayerShapes
{
    std::vector<TensorShape> inputs;   // one per predecessor
    TensorShape output;
};

struct Diagnostic
{
    int layerId = 0;
    std::string rule;
    std::string message;
};

/// Output extent of a sliding window along one axis. May be <= 0 for an invalid geometry.
int64_t SlidingOutputExtent(int64_t in, int64_t padLo, int64_t padHi, int64_t kernel, int64_t dilation,
                            int64_t stride);

/// Parses and validates a workload document (JSON). Layers may appear in any order; the
/// result is topologically sorted. Throws ConfigError.
WorkloadGraph ParseWorkload(std::string_view text);
WorkloadGraph LoadWorkload(const std::string& path);

/// Canonical JSON rendering; `ParseWorkload(SerializeWorkload(g)) == g`.
std::string SerializeWorkload(const WorkloadGraph& graph);

/// Per-layer input/output shapes in layer order. Throws ConfigError on a non-positive extent
/// or an Add shape mismatch.
std::vector<LayerShapes> InferShapes(const WorkloadGraph& graph);

/// Empty iff every structural and geometric invariant holds.
std::vector<Diagnostic> ValidateGraph(const WorkloadGraph& graph);

/// MACs a Conv layer spends per output position (all output channels).
int64_t MacsPerPosition(const LayerSpec& layer, int64_t inChannels);
/// Non-MAC operations (Pool compares, Add sums) per output position.
int64_t OpsPerPosition(const LayerSpec& layer, int64_t channels);

/// Sum of Conv MACs over the given per-layer output regions (only x and y of each shape
/// are used). Pool and Add contribute zero.
int64_t MacCount(const WorkloadGraph& graph, const std::vector<TensorShape>& outputRegions);
/// MacCount over the full inferred output shapes.
int64_t MacCount(const WorkloadGraph& graph);

/// Weight words of a layer (0 for Pool/Add).
int64_t WeightWords(const LayerSpec& layer, int64_t inChannels);

}   // namespace causalflow
