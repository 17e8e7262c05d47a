//
// Copyright © 2026 The causalflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "causalflow/hardware.hpp"
#include "causalflow/schedule.hpp"
#include "causalflow/transform.hpp"
#include "causalflow/workload.hpp"

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace causalflow
{

/// A dependency region was not available when a tile needed it.
class CacheMissError : public std::logic_error
{
public:
    using std::logic_error::logic_error;
};

/// Dense integer tensor, layout [y][x][c].
struct Tensor
{
    TensorShape shape;
    std::vector<int64_t> values;

    Tensor() = default;
    explicit Tensor(TensorShape s);

    int64_t& At(int64_t x, int64_t y, int64_t c);
    int64_t At(int64_t x, int64_t y, int64_t c) const;
    bool operator==(const Tensor&) const = default;
};

/// Uniform integers in [lo, hi].
Tensor RandomTensor(TensorShape shape, std::mt19937_64& rng, int64_t lo = -32768, int64_t hi = 32767);

/// Conv weights per layer index, layout [k][c][fy][fx]; empty for Pool/Add.
using WeightSet = std::vector<std::vector<int64_t>>;

WeightSet MakeWeights(const WorkloadGraph& graph, uint64_t seed);
/// Weights for the layers of a flattened workload (identical kernels as the original graph).
WeightSet MakeWeights(const FlattenedWorkload& flat, uint64_t seed);

/// Plain nested-loop execution of every frame; returns the sink output of each frame.
std::vector<Tensor> ExecuteReference(const WorkloadGraph& graph, const WeightSet& weights,
                                     const std::vector<Tensor>& frames);

/// Consecutive input frames, each shifted by one temporal step, drawn from `stream`.
std::vector<Tensor> FramesFromStream(const Tensor& stream, int64_t frameRows, int64_t count);

/// Flattened input covering `rows` rows, rebuilt from overlapping frames. Throws
/// std::invalid_argument when the frames do not reach far enough.
Tensor StreamFromFrames(const std::vector<Tensor>& frames, int64_t rows);

/// Runs the flattened layers once over the flattened input; returns every layer's output.
std::vector<Tensor> ExecuteFlattenedAll(const FlattenedWorkload& flat, const WeightSet& weights, const Tensor& input);
Tensor ExecuteFlattened(const FlattenedWorkload& flat, const WeightSet& weights, const std::vector<Tensor>& frames);

/// Frame index and original output row a flattened sink row corresponds to.
struct FrameRow
{
    int64_t frame = 0;
    int64_t row = 0;
};
FrameRow ReferenceRowOf(const FlattenedWorkload& flat, int64_t flattenedRow);

struct ExecutionTrace
{
    int64_t executedMacs = 0;
    int64_t executedOps = 0;
    int64_t peakLiveBytes = 0;
    std::vector<int64_t> stackPeakLiveBytes;
    /// Rows x cols bounding box each layer produced.
    std::vector<Interval> producedRows;
    std::vector<Interval> producedCols;
    /// Input/output traffic per memory level (weights excluded).
    std::vector<std::string> levelNames;
    std::vector<LevelAccess> levels;
};

/// Tile-by-tile execution of `candidate` in the cost model's tile order with an explicit
/// inter-layer cache. In RealTime mode all rows but the newest are pre-filled from
/// `input`. Throws CacheMissError if any tile reads a value that was never produced.
std::pair<Tensor, ExecutionTrace> ExecuteTiledDf(const FlattenedWorkload& flat, const WeightSet& weights,
                                                 const ScheduleCandidate& candidate, const AcceleratorSpec& hw,
                                                 const Tensor& input);

int64_t CountMacsExecuted(const ExecutionTrace& trace);

/// Parameters of the random graphs used by the equivalence fuzzers.
struct FuzzOptions
{
    int maxDepth = 6;
    int64_t maxExtent = 32;
    bool residuals = true;
    /// Keep (kernel-1)*dilation + 1 >= stride on every axis so tiles never skip rows.
    bool contiguousTaps = false;
};

WorkloadGraph RandomWorkload(uint64_t seed, const FuzzOptions& options = {});

struct FuzzOutcome
{
    int passed = 0;
    std::vector<uint64_t> failedSeeds;
    std::vector<std::string> messages;
};

/// Flattened (Batch and RealTime) vs reference execution on `count` random graphs.
FuzzOutcome FuzzTransformEquivalence(uint64_t firstSeed, int count, const FuzzOptions& options = {});

/// Tiled vs flattened execution and cost-model calibration for random candidates.
FuzzOutcome FuzzScheduleEquivalence(uint64_t firstSeed, int count, const AcceleratorSpec& hw,
                                    const FuzzOptions& options = {});

/// Result of comparing the oracle trace with the cost model for one candidate.
struct CalibrationCheck
{
    bool outputMatches = false;
    bool peakMatches = false;
    bool accessMatches = false;
    bool macsMatch = false;
    std::string detail;

    bool Ok() const { return outputMatches && peakMatches && accessMatches && macsMatch; }
};

CalibrationCheck CheckCandidateAgainstOracle(const FlattenedWorkload& flat, const ScheduleCandidate& candidate,
                                             const AcceleratorSpec& hw, uint64_t seed);

}   // namespace causalflow
