//
// Copyright © 2026 The causalflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "causalflow/workload.hpp"

#include <string>
#include <vector>

namespace causalflow::test
{

inline LayerSpec Conv(int id, int64_t k, int64_t kx, int64_t ky, int64_t sy = 1, int64_t dy = 1,
                      std::vector<int> preds = {})
{
    LayerSpec l;
    l.id = id;
    l.kind = LayerKind::Conv;
    l.outChannels = k;
    l.kernelX = kx;
    l.kernelY = ky;
    l.strideY = sy;
    l.dilationY = dy;
    l.predecessors = preds.empty() ? std::vector<int>{ id - 1 == 0 ? kNetworkInput : id - 1 } : preds;
    return l;
}

inline LayerSpec Pool(int id, int64_t kx, int64_t ky, int64_t sx, int64_t sy, std::vector<int> preds = {})
{
    LayerSpec l;
    l.id = id;
    l.kind = LayerKind::Pool;
    l.kernelX = kx;
    l.kernelY = ky;
    l.strideX = sx;
    l.strideY = sy;
    l.predecessors = preds.empty() ? std::vector<int>{ id - 1 == 0 ? kNetworkInput : id - 1 } : preds;
    return l;
}

inline LayerSpec Add(int id, int a, int b)
{
    LayerSpec l;
    l.id = id;
    l.kind = LayerKind::ElementwiseAdd;
    l.predecessors = { a, b };
    return l;
}

inline WorkloadGraph Graph(TensorShape in, std::vector<LayerSpec> layers)
{
    WorkloadGraph g;
    g.inputShape = in;
    g.layers = std::move(layers);
    return g;
}

/// Conv3(s_y 2) -> Pool2(s_y 2) -> Conv3 on a 1-wide temporal input.
inline WorkloadGraph Fig5Chain(int64_t rows = 17)
{
    return Graph({ 1, rows, 1 }, { Conv(1, 1, 1, 3, 2), Pool(2, 1, 2, 1, 2), Conv(3, 1, 1, 3) });
}

inline std::string SourceDir()
{
    return CAUSALFLOW_SOURCE_DIR;
}

inline std::string WorkloadPath(const std::string& name)
{
    return SourceDir() + "/configs/workloads/" + name + ".json";
}

inline std::string DeskWorkloadPath(const std::string& name)
{
    return SourceDir() + "/configs/workloads/desk/" + name + ".json";
}

inline const std::vector<std::string>& SuiteWorkloads()
{
    static const std::vector<std::string> names = { "stft_cnn", "mobilenet_like", "resnet_like", "fig5_chain" };
    return names;
}

}   // namespace causalflow::test
