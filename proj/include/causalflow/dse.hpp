//
// Copyright © 2026 The causalflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "causalflow/costmodel.hpp"
#include "causalflow/schedule.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace causalflow
{

/// Nothing survived pruning.
class InfeasibleSpace : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

enum class Objective
{
    Latency,
    Energy,
    Edp,
    Pareto,
};

std::string_view ToString(Objective objective);
Objective ParseObjective(std::string_view text);

struct SearchSpace
{
    /// Explicit tile list applied to every sub-stack (clamped to its exit); empty = default ladder.
    std::vector<TileConfig> tiles;
    int maxCuts = 2;
    Objective objective = Objective::Pareto;
    bool dramSkip = true;
    /// Worker threads; 0 = hardware concurrency.
    int threads = 0;
};

struct EvaluatedCandidate
{
    ScheduleCandidate candidate;
    CostBreakdown cost;
};

struct ExploreResult
{
    std::vector<EvaluatedCandidate> evaluated;   // enumeration order
    std::vector<EvaluatedCandidate> pareto;      // latency ascending
    size_t bestLatency = 0;                      // indices into `evaluated`
    size_t bestEnergy = 0;
    size_t bestEdp = 0;
    int64_t evaluatedCount = 0;
    int64_t rejectedCount = 0;                   // early-stopped candidates
    int64_t dominatedCount = 0;                  // skipped: a sub-stack tile was strictly dominated

    const EvaluatedCandidate& Best(Objective objective) const;
};

/// All cut sets with 0..maxCuts cuts over positions 1..n-1, by size then lexicographically.
std::vector<std::vector<int>> EnumerateCuts(int layerCount, int maxCuts);
/// EnumerateCuts filtered to sets whose every sub-stack is valid.
std::vector<std::vector<int>> EnumerateValidCuts(const FlattenedWorkload& flat, int maxCuts);

/// Tile point at the PE array's OX/OY unrolling, clamped to the exit.
TileConfig FixedTile(TileConfig exitSpace, const PEArray& pe);

/// Powers of two per axis up to the extent plus the extent itself, crossed; plus the fixed
/// tile when `pe` is given. Sorted by (ty, tx).
std::vector<TileConfig> DefaultTileCandidates(TileConfig exitSpace, const PEArray* pe = nullptr);

/// True iff some sub-stack's per-tile fresh footprint exceeds on-chip activation capacity.
bool EarlyStop(const FlattenedWorkload& flat, const ScheduleCandidate& candidate, const AcceleratorSpec& hw);

/// Boundary tensor plus co-resident cached data fit the global buffer (inclusive).
bool DramSkipEligible(int64_t boundaryBytes, int64_t residentBytes, const MemoryLevel& gb);

struct CostPoint
{
    double latency = 0.0;
    double energy = 0.0;
};

/// Indices of the 2-D non-dominated points, latency ascending; duplicates keep the first.
std::vector<size_t> ParetoFilter(const std::vector<CostPoint>& points);

ExploreResult Explore(const FlattenedWorkload& flat, const AcceleratorSpec& hw, const SearchSpace& space);

/// Depth-first over the whole network at the fixed tile, no cuts.
EvaluatedCandidate FixedTilingSchedule(const FlattenedWorkload& flat, const AcceleratorSpec& hw);

/// Finest valid partition, every sub-stack at full tile through the dedicated evaluator, all
/// boundaries through DRAM.
EvaluatedCandidate LayerByLayerSchedule(const FlattenedWorkload& flat, const AcceleratorSpec& hw);

/// Applies the DS rule to every boundary of a candidate whose sub-stacks are already costed.
std::vector<bool> GreedyDramSkip(const std::vector<CostBreakdown>& stacks, const AcceleratorSpec& hw,
                                 int activationBits);

}   // namespace causalflow
