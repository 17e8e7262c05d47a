//
// Copyright © 2026 The causalflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "causalflow/report.hpp"

#include <json.hpp>

#include <array>
#include <charconv>
#include <stdexcept>

namespace causalflow
{

std::string FormatDouble(double value)
{
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc{})
    {
        throw std::runtime_error("cannot format number");
    }
    return std::string(buf.data(), ptr);
}

std::vector<std::string> CostColumns(const std::vector<std::string>& levelNames)
{
    std::vector<std::string> cols = { "candidate", "latency_cycles", "energy", "edp", "peak_io_cache_bytes", "macs",
                                      "util_avg" };
    for (const auto& n : levelNames)
    {
        cols.push_back("reads_" + n);
        cols.push_back("writes_" + n);
    }
    return cols;
}

namespace
{

std::string Quote(const std::string& field)
{
    if (field.find_first_of(",\"\n") == std::string::npos)
    {
        return field;
    }
    std::string out = "\"";
    for (char c : field)
    {
        out += c;
        if (c == '"')
        {
            out += '"';
        }
    }
    return out + "\"";
}

std::string Join(const std::vector<std::string>& fields)
{
    std::string line;
    for (size_t i = 0; i < fields.size(); ++i)
    {
        line += (i ? "," : "") + Quote(fields[i]);
    }
    return line + "\n";
}

int64_t ToInt(const std::string& s)
{
    int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
    {
        throw std::invalid_argument("not an integer: '" + s + "'");
    }
    return v;
}

double ToDouble(const std::string& s)
{
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
    {
        throw std::invalid_argument("not a number: '" + s + "'");
    }
    return v;
}

}   // namespace

std::string CsvHeader(const std::vector<std::string>& levelNames)
{
    return Join(CostColumns(levelNames));
}

std::string CsvRow(const EvaluatedCandidate& ec)
{
    const CostBreakdown& c = ec.cost;
    std::vector<std::string> f = { EncodeCandidate(ec.candidate),
                                   std::to_string(c.latencyCycles),
                                   FormatDouble(c.energy),
                                   FormatDouble(c.edp),
                                   std::to_string(c.peakIoCacheBytes),
                                   std::to_string(c.macs),
                                   FormatDouble(c.utilAvg) };
    for (const auto& l : c.levels)
    {
        f.push_back(std::to_string(l.reads));
        f.push_back(std::to_string(l.writes));
    }
    return Join(f);
}

std::string CandidatesCsv(const std::vector<EvaluatedCandidate>& rows, const std::vector<std::string>& levelNames)
{
    std::string out = CsvHeader(levelNames);
    for (const auto& r : rows)
    {
        out += CsvRow(r);
    }
    return out;
}

std::vector<std::vector<std::string>> ParseCsv(const std::string& text)
{
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool fieldStarted = false;
    for (size_t i = 0; i < text.size(); ++i)
    {
        char c = text[i];
        if (quoted)
        {
            if (c == '"')
            {
                if (i + 1 < text.size() && text[i + 1] == '"')
                {
                    field += '"';
                    ++i;
                }
                else
                {
                    quoted = false;
                }
            }
            else
            {
                field += c;
            }
            continue;
        }
        if (c == '"' && field.empty())
        {
            quoted = true;
            fieldStarted = true;
        }
        else if (c == ',')
        {
            row.push_back(std::move(field));
            field.clear();
            fieldStarted = true;
        }
        else if (c == '\n')
        {
            row.push_back(std::move(field));
            field.clear();
            rows.push_back(std::move(row));
            row.clear();
            fieldStarted = false;
        }
        else if (c != '\r')
        {
            field += c;
            fieldStarted = true;
        }
    }
    if (quoted)
    {
        throw std::invalid_argument("unterminated quoted CSV field");
    }
    if (fieldStarted || !field.empty())
    {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

EvaluatedCandidate ParseCsvRow(const std::vector<std::string>& header, const std::vector<std::string>& row)
{
    if (header.size() != row.size() || header.size() < 7 || (header.size() - 7) % 2 != 0)
    {
        throw std::invalid_argument("CSV row does not match the header");
    }
    EvaluatedCandidate ec;
    ec.candidate = DecodeCandidate(row[0]);
    ec.cost.latencyCycles = ToInt(row[1]);
    ec.cost.energy = ToDouble(row[2]);
    ec.cost.edp = ToDouble(row[3]);
    ec.cost.peakIoCacheBytes = ToInt(row[4]);
    ec.cost.macs = ToInt(row[5]);
    ec.cost.utilAvg = ToDouble(row[6]);
    for (size_t i = 7; i < header.size(); i += 2)
    {
        const std::string& h = header[i];
        if (h.rfind("reads_", 0) != 0 || header[i + 1] != "writes_" + h.substr(6))
        {
            throw std::invalid_argument("unexpected CSV column '" + h + "'");
        }
        ec.cost.levelNames.push_back(h.substr(6));
        LevelAccess a;
        a.reads = ToInt(row[i]);
        a.writes = ToInt(row[i + 1]);
        ec.cost.levels.push_back(a);
    }
    return ec;
}

std::string SummaryJson(const RunInfo& info, const ExploreResult& result)
{
    using Json = nlohmann::ordered_json;
    auto pick = [](const EvaluatedCandidate& ec) {
        Json j;
        j["candidate"] = EncodeCandidate(ec.candidate);
        j["latency_cycles"] = ec.cost.latencyCycles;
        j["energy"] = ec.cost.energy;
        j["edp"] = ec.cost.edp;
        j["peak_io_cache_bytes"] = ec.cost.peakIoCacheBytes;
        j["macs"] = ec.cost.macs;
        return j;
    };
    Json doc;
    doc["workload"] = info.workload;
    doc["hardware"] = info.hardware;
    doc["mode"] = std::string(ToString(info.mode));
    doc["objective"] = std::string(ToString(info.objective));
    doc["max_cuts"] = info.maxCuts;
    doc["seed"] = info.seed;
    doc["evaluated_count"] = result.evaluatedCount;
    doc["rejected_count"] = result.rejectedCount;
    doc["dominated_count"] = result.dominatedCount;
    doc["pareto_size"] = result.pareto.size();
    doc["best_lat"] = pick(result.Best(Objective::Latency));
    doc["best_ene"] = pick(result.Best(Objective::Energy));
    doc["best_edp"] = pick(result.Best(Objective::Edp));
    return doc.dump(2) + "\n";
}

}   // namespace causalflow
