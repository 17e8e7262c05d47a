//
// Copyright © 2026 The causalflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "causalflow/costmodel.hpp"

#include <string>
#include <vector>

namespace causalflow
{

/// Fusion cuts, one tile size per sub-stack and one DRAM-skip flag per boundary.
struct ScheduleCandidate
{
    std::vector<int> cuts;   // strictly increasing; a cut at c starts a new sub-stack at layer c
    std::vector<TileConfig> tiles;
    std::vector<bool> dramSkip;

    bool operator==(const ScheduleCandidate&) const = default;
};

std::vector<SubStack> SubStacksOf(const std::vector<int>& cuts, int layerCount);

/// `cuts=i,j;tiles=(tx,ty)|...;ds=1,0`
std::string EncodeCandidate(const ScheduleCandidate& candidate);
ScheduleCandidate DecodeCandidate(const std::string& text);

/// Checks cut ordering and per-sub-stack/per-boundary arity; throws std::invalid_argument.
void CheckCandidate(const FlattenedWorkload& flat, const ScheduleCandidate& candidate);

/// Bytes a sub-stack hands to its successor per invocation.
int64_t BoundaryBytes(const CostBreakdown& producer, int activationBits);

/// End-to-end cost of a candidate: per-sub-stack evaluation plus boundary transfers.
CostBreakdown EvaluateCandidate(const FlattenedWorkload& flat, const ScheduleCandidate& candidate,
                                const AcceleratorSpec& hw);

}   // namespace causalflow
