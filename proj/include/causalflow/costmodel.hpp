//
// Copyright © 2026 The causalflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "causalflow/geometry.hpp"
#include "causalflow/hardware.hpp"
#include "causalflow/transform.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace causalflow
{

/// A tile's fresh activations do not fit in on-chip memory at all.
class OnChipOverflow : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Contiguous range [first, last] of flattened layers scheduled depth-first as one unit.
struct SubStack
{
    int first = 0;
    int last = 0;

    int Size() const { return last - first + 1; }
    bool operator==(const SubStack&) const = default;
    auto operator<=>(const SubStack&) const = default;
};

/// True when the only tensor entering the stack is the output of layer first-1 (or the
/// network input for first == 0).
bool IsValidSubStack(const FlattenedWorkload& flat, const SubStack& stack);

struct TileConfig
{
    int64_t tx = 1;   // output columns per tile
    int64_t ty = 1;   // output rows per tile

    bool operator==(const TileConfig&) const = default;
    auto operator<=>(const TileConfig&) const = default;
};

/// Exit extents (columns, rows) a sub-stack's tiles partition.
TileConfig ExitTileSpace(const FlattenedWorkload& flat, const SubStack& stack);
/// Clamp a tile to the exit extents.
TileConfig ClampTile(const FlattenedWorkload& flat, const SubStack& stack, TileConfig tile);

enum class TilePhase
{
    WarmUp,
    Stable,
};

struct TileInstance
{
    int64_t band = 0;
    int64_t column = 0;
    Interval rows;
    Interval cols;
    TilePhase phase = TilePhase::Stable;
};

/// Row-major tile order over the stack's exit tensor.
std::vector<TileInstance> ScheduleTiles(const FlattenedWorkload& flat, const SubStack& stack, TileConfig tile);

/// Required region of one tensor for a tile, split into freshly produced and cached parts.
struct RegionSplit
{
    Interval rows;   // required hull
    Interval cols;
    int64_t freshElements = 0;    // positions (all channels)
    int64_t cachedElements = 0;
    IntervalSet freshRows;
    IntervalSet freshCols;
};

/// Entry 0 is the stack's entry tensor, entry i (i >= 1) is layer first + i - 1.
struct DependencyMap
{
    std::vector<RegionSplit> tensors;
};

DependencyMap BackpropDependency(const FlattenedWorkload& flat, const SubStack& stack, TileConfig tile,
                                 size_t tileIndex);

struct LevelAccess
{
    int64_t reads = 0;
    int64_t writes = 0;
    int64_t ioReads = 0;    // input/output operand share of `reads`
    int64_t ioWrites = 0;

    bool operator==(const LevelAccess&) const = default;
};

struct CostBreakdown
{
    int64_t latencyCycles = 0;
    double energy = 0.0;
    double edp = 0.0;
    int64_t peakIoCacheBytes = 0;
    int64_t peakCacheBytes = 0;   // cached part of the live set
    int64_t macs = 0;
    int64_t ops = 0;              // pool/add operations
    double utilAvg = 1.0;
    int64_t exitWords = 0;        // words the stack emits per invocation
    std::vector<std::string> levelNames;
    std::vector<LevelAccess> levels;

    bool operator==(const CostBreakdown&) const = default;
};

/// Largest per-tile fresh footprint (entry arrivals, computed activations, tile outputs) in bytes.
int64_t FreshFootprintBytes(const FlattenedWorkload& flat, const SubStack& stack, TileConfig tile);

/// High-water mark of live input + output + cached bytes over the tile sequence.
int64_t PeakIoCache(const FlattenedWorkload& flat, const SubStack& stack, TileConfig tile);
/// PeakIoCache restricted to Stable tiles; 0 when every tile is WarmUp.
int64_t StablePeakIoCache(const FlattenedWorkload& flat, const SubStack& stack, TileConfig tile);

/// Analytical cost of one sub-stack under a tile schedule. Throws OnChipOverflow when a
/// tile's fresh activations exceed the on-chip activation capacity.
CostBreakdown EvaluateSubStack(const FlattenedWorkload& flat, const SubStack& stack, TileConfig tile,
                               const AcceleratorSpec& hw);

/// Dedicated single-pass evaluator for one full-output tile (layer-by-layer execution of
/// the stack). Matches EvaluateSubStack at tile = full exit.
CostBreakdown EvaluateLayerByLayer(const FlattenedWorkload& flat, const SubStack& stack,
                                   const AcceleratorSpec& hw);

struct Boundary
{
    bool viaDram = true;
    int64_t transferBytes = 0;
};

/// Sums sub-stack costs and charges each boundary transfer at DRAM or GB rates.
CostBreakdown Aggregate(const std::vector<CostBreakdown>& stacks, const std::vector<Boundary>& boundaries,
                        const AcceleratorSpec& hw, int activationBits);

int64_t BytesForWords(int64_t words, int bits);

}   // namespace causalflow
