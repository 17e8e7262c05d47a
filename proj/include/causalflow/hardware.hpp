//
// Copyright © 2026 The causalflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "causalflow/workload.hpp"

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace causalflow
{

enum class Operand
{
    Weights,
    Inputs,
    Outputs,
};

inline constexpr int64_t kUnboundedCapacity = std::numeric_limits<int64_t>::max();

struct MemoryLevel
{
    std::string name;
    int64_t capacityBytes = 0;   // kUnboundedCapacity for DRAM
    double readCost = 0.0;       // energy units per word
    double writeCost = 0.0;
    double bandwidth = 1.0;      // words per cycle
    bool servesWeights = false;
    bool servesInputs = false;
    bool servesOutputs = false;
    bool isGlobalBuffer = false;

    bool Unbounded() const { return capacityBytes == kUnboundedCapacity; }
    bool Serves(Operand op) const;
    bool operator==(const MemoryLevel&) const = default;
};

/// Dimensions the PE array can unroll over.
enum class LoopDim
{
    K,
    C,
    OX,
    OY,
    FX,
    FY,
};

std::string_view ToString(LoopDim dim);

struct PEArray
{
    int64_t totalMacs = 0;
    double macCost = 0.0;
    std::vector<std::pair<LoopDim, int64_t>> unrolling;

    int64_t UnrollOf(LoopDim dim) const;
    bool operator==(const PEArray&) const = default;
};

struct AcceleratorSpec
{
    std::string name;
    PEArray pe;
    std::vector<MemoryLevel> levels;   // innermost first, DRAM last

    int GlobalBufferIndex() const;
    int DramIndex() const { return static_cast<int>(levels.size()) - 1; }
    /// Innermost level serving the operand.
    int InnermostFor(Operand op) const;
    /// Sum of on-chip capacities able to hold activations (every bounded level serving I or O).
    int64_t ActivationCapacityBytes() const;
    bool operator==(const AcceleratorSpec&) const = default;
};

AcceleratorSpec ParseAccelerator(std::string_view text);
AcceleratorSpec LoadAccelerator(const std::string& path);
std::string SerializeAccelerator(const AcceleratorSpec& spec);

/// Named presets: "meta-edge-like", "tpu-edge-like", "tesla-npu-like".
AcceleratorSpec PresetAccelerator(const std::string& name);
std::vector<std::string> PresetNames();

/// Fraction of the array kept busy by a tile; dimensions missing from `tile` count as full.
double Utilization(const std::map<LoopDim, int64_t>& tile, const PEArray& pe);

bool Fits(const MemoryLevel& level, int64_t bytes);

}   // namespace causalflow
