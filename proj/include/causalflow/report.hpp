//
// Copyright © 2026 The causalflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "causalflow/dse.hpp"

#include <string>
#include <vector>

namespace causalflow
{

/// Shortest round-trip decimal rendering.
std::string FormatDouble(double value);

/// Column names: candidate, latency_cycles, energy, edp, peak_io_cache_bytes, macs,
/// util_avg, then reads_<level>, writes_<level> per memory level.
std::vector<std::string> CostColumns(const std::vector<std::string>& levelNames);

std::string CsvHeader(const std::vector<std::string>& levelNames);
std::string CsvRow(const EvaluatedCandidate& ec);
std::string CandidatesCsv(const std::vector<EvaluatedCandidate>& rows, const std::vector<std::string>& levelNames);

/// RFC 4180 parsing (quoted fields, doubled quotes). Throws std::invalid_argument.
std::vector<std::vector<std::string>> ParseCsv(const std::string& text);

/// Rebuilds candidate and cost fields from a data row of CandidatesCsv.
EvaluatedCandidate ParseCsvRow(const std::vector<std::string>& header, const std::vector<std::string>& row);

struct RunInfo
{
    std::string workload;
    std::string hardware;
    ExecutionMode mode = ExecutionMode::Batch;
    Objective objective = Objective::Pareto;
    int maxCuts = 2;
    uint64_t seed = 0;
};

/// Structured summary with counts and the best-latency/energy/EDP schedules.
std::string SummaryJson(const RunInfo& info, const ExploreResult& result);

}   // namespace causalflow
