//
// Copyright © 2026 The causalflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "causalflow/hardware.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace causalflow
{

using Json = nlohmann::ordered_json;

bool MemoryLevel::Serves(Operand op) const
{
    switch (op)
    {
        case Operand::Weights:
            return servesWeights;
        case Operand::Inputs:
            return servesInputs;
        case Operand::Outputs:
            return servesOutputs;
    }
    return false;
}

std::string_view ToString(LoopDim dim)
{
    switch (dim)
    {
        case LoopDim::K:
            return "K";
        case LoopDim::C:
            return "C";
        case LoopDim::OX:
            return "OX";
        case LoopDim::OY:
            return "OY";
        case LoopDim::FX:
            return "FX";
        case LoopDim::FY:
            return "FY";
    }
    return "?";
}

int64_t PEArray::UnrollOf(LoopDim dim) const
{
    int64_t f = 1;
    for (const auto& [d, factor] : unrolling)
    {
        if (d == dim)
        {
            f *= factor;
        }
    }
    return f;
}

int AcceleratorSpec::GlobalBufferIndex() const
{
    for (size_t i = 0; i < levels.size(); ++i)
    {
        if (levels[i].isGlobalBuffer)
        {
            return static_cast<int>(i);
        }
    }
    return -1;
}

int AcceleratorSpec::InnermostFor(Operand op) const
{
    for (size_t i = 0; i < levels.size(); ++i)
    {
        if (levels[i].Serves(op))
        {
            return static_cast<int>(i);
        }
    }
    return DramIndex();
}

int64_t AcceleratorSpec::ActivationCapacityBytes() const
{
    int64_t total = 0;
    for (const auto& l : levels)
    {
        if (!l.Unbounded() && (l.servesInputs || l.servesOutputs))
        {
            total += l.capacityBytes;
        }
    }
    return total;
}

namespace
{

[[noreturn]] void Fail(const std::string& msg)
{
    throw ConfigError("hardware: " + msg);
}

void CheckKeys(const Json& obj, std::initializer_list<std::string_view> allowed, const std::string& where)
{
    if (!obj.is_object())
    {
        Fail(where + ": expected an object");
    }
    for (auto it = obj.begin(); it != obj.end(); ++it)
    {
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
        {
            Fail(where + ": unknown key '" + it.key() + "'");
        }
    }
}

const Json& Require(const Json& obj, const char* key, const std::string& where)
{
    if (!obj.contains(key))
    {
        Fail(where + ": missing key '" + key + "'");
    }
    return obj.at(key);
}

double GetNumber(const Json& obj, const char* key, const std::string& where)
{
    const Json& v = Require(obj, key, where);
    if (!v.is_number())
    {
        Fail(where + ": '" + key + "' must be a number");
    }
    return v.get<double>();
}

LoopDim ParseDim(const std::string& s, const std::string& where)
{
    for (LoopDim d : { LoopDim::K, LoopDim::C, LoopDim::OX, LoopDim::OY, LoopDim::FX, LoopDim::FY })
    {
        if (s == ToString(d))
        {
            return d;
        }
    }
    Fail(where + ": unknown unrolling dimension '" + s + "'");
}

void Validate(const AcceleratorSpec& spec)
{
    if (spec.pe.totalMacs < 1)
    {
        Fail("pe.total_macs must be >= 1");
    }
    int64_t product = 1;
    for (const auto& [dim, factor] : spec.pe.unrolling)
    {
        if (factor < 1)
        {
            Fail("unrolling factor for " + std::string(ToString(dim)) + " must be >= 1");
        }
        product *= factor;
    }
    if (product != spec.pe.totalMacs)
    {
        Fail("unrolling product " + std::to_string(product) + " does not equal total_macs " +
             std::to_string(spec.pe.totalMacs));
    }
    if (spec.levels.size() < 2)
    {
        Fail("need at least one on-chip level below DRAM");
    }
    int gbCount = 0;
    for (size_t i = 0; i < spec.levels.size(); ++i)
    {
        const MemoryLevel& l = spec.levels[i];
        bool last = i + 1 == spec.levels.size();
        if (last != l.Unbounded())
        {
            Fail("level '" + l.name + "': exactly the outermost level (DRAM) must be unbounded");
        }
        if (!l.Unbounded() && l.capacityBytes <= 0)
        {
            Fail("level '" + l.name + "': capacity must be > 0");
        }
        if (!(l.bandwidth > 0.0))
        {
            Fail("level '" + l.name + "': bandwidth must be > 0");
        }
        if (l.readCost < 0.0 || l.writeCost < 0.0)
        {
            Fail("level '" + l.name + "': access costs must be >= 0");
        }
        gbCount += l.isGlobalBuffer ? 1 : 0;
    }
    if (gbCount != 1)
    {
        Fail("exactly one level must be flagged is_global_buffer (found " + std::to_string(gbCount) + ")");
    }
    const MemoryLevel& dram = spec.levels.back();
    if (!(dram.servesWeights && dram.servesInputs && dram.servesOutputs))
    {
        Fail("DRAM must serve weights, inputs and outputs");
    }
    if (spec.levels[static_cast<size_t>(spec.GlobalBufferIndex())].Unbounded())
    {
        Fail("the global buffer must be on-chip");
    }
}

}   // namespace

AcceleratorSpec ParseAccelerator(std::string_view text)
{
    Json doc;
    try
    {
        doc = Json::parse(text);
    }
    catch (const nlohmann::json::parse_error& e)
    {
        Fail(e.what());
    }
    CheckKeys(doc, { "name", "pe", "levels" }, "document");
    AcceleratorSpec spec;
    if (doc.contains("name"))
    {
        spec.name = doc.at("name").get<std::string>();
    }
    const Json& pe = Require(doc, "pe", "document");
    CheckKeys(pe, { "total_macs", "mac_cost", "unrolling" }, "pe");
    const Json& total = Require(pe, "total_macs", "pe");
    if (!total.is_number_integer())
    {
        Fail("pe.total_macs must be an integer");
    }
    spec.pe.totalMacs = total.get<int64_t>();
    spec.pe.macCost = GetNumber(pe, "mac_cost", "pe");
    const Json& unroll = Require(pe, "unrolling", "pe");
    if (!unroll.is_array())
    {
        Fail("pe.unrolling must be a list");
    }
    for (const auto& u : unroll)
    {
        CheckKeys(u, { "dim", "factor" }, "pe.unrolling");
        const Json& factor = Require(u, "factor", "pe.unrolling");
        if (!factor.is_number_integer())
        {
            Fail("pe.unrolling factor must be an integer");
        }
        spec.pe.unrolling.emplace_back(ParseDim(Require(u, "dim", "pe.unrolling").get<std::string>(), "pe.unrolling"),
                                       factor.get<int64_t>());
    }
    const Json& levels = Require(doc, "levels", "document");
    if (!levels.is_array())
    {
        Fail("levels must be a list");
    }
    for (size_t i = 0; i < levels.size(); ++i)
    {
        const Json& l = levels[i];
        std::string where = "levels[" + std::to_string(i) + "]";
        CheckKeys(l,
                  { "name", "capacity_bytes", "read_cost", "write_cost", "bandwidth_words_per_cycle", "serves",
                    "is_global_buffer" },
                  where);
        MemoryLevel m;
        m.name = Require(l, "name", where).get<std::string>();
        const Json& cap = Require(l, "capacity_bytes", where);
        if (cap.is_string() && cap.get<std::string>() == "unbounded")
        {
            m.capacityBytes = kUnboundedCapacity;
        }
        else if (cap.is_number_integer())
        {
            m.capacityBytes = cap.get<int64_t>();
        }
        else
        {
            Fail(where + ": capacity_bytes must be an integer or \"unbounded\"");
        }
        m.readCost = GetNumber(l, "read_cost", where);
        m.writeCost = GetNumber(l, "write_cost", where);
        m.bandwidth = GetNumber(l, "bandwidth_words_per_cycle", where);
        const Json& serves = Require(l, "serves", where);
        if (!serves.is_array())
        {
            Fail(where + ": serves must be a list");
        }
        for (const auto& s : serves)
        {
            std::string op = s.get<std::string>();
            if (op == "W")
            {
                m.servesWeights = true;
            }
            else if (op == "I")
            {
                m.servesInputs = true;
            }
            else if (op == "O")
            {
                m.servesOutputs = true;
            }
            else
            {
                Fail(where + ": unknown operand '" + op + "' (expected W, I or O)");
            }
        }
        if (l.contains("is_global_buffer"))
        {
            m.isGlobalBuffer = l.at("is_global_buffer").get<bool>();
        }
        spec.levels.push_back(std::move(m));
    }
    Validate(spec);
    return spec;
}

AcceleratorSpec LoadAccelerator(const std::string& path)
{
    std::ifstream f(path);
    if (!f)
    {
        throw ConfigError("cannot open hardware file '" + path + "'");
    }
    std::stringstream ss;
    ss << f.rdbuf();
    return ParseAccelerator(ss.str());
}

std::string SerializeAccelerator(const AcceleratorSpec& spec)
{
    Json doc;
    doc["name"] = spec.name;
    Json unroll = Json::array();
    for (const auto& [dim, factor] : spec.pe.unrolling)
    {
        unroll.push_back({ { "dim", std::string(ToString(dim)) }, { "factor", factor } });
    }
    doc["pe"] = { { "total_macs", spec.pe.totalMacs }, { "mac_cost", spec.pe.macCost }, { "unrolling", unroll } };
    Json levels = Json::array();
    for (const auto& l : spec.levels)
    {
        Json j;
        j["name"] = l.name;
        if (l.Unbounded())
        {
            j["capacity_bytes"] = "unbounded";
        }
        else
        {
            j["capacity_bytes"] = l.capacityBytes;
        }
        j["read_cost"] = l.readCost;
        j["write_cost"] = l.writeCost;
        j["bandwidth_words_per_cycle"] = l.bandwidth;
        Json serves = Json::array();
        if (l.servesWeights)
        {
            serves.push_back("W");
        }
        if (l.servesInputs)
        {
            serves.push_back("I");
        }
        if (l.servesOutputs)
        {
            serves.push_back("O");
        }
        j["serves"] = serves;
        if (l.isGlobalBuffer)
        {
            j["is_global_buffer"] = true;
        }
        levels.push_back(std::move(j));
    }
    doc["levels"] = levels;
    return doc.dump(2) + "\n";
}

std::vector<std::string> PresetNames()
{
    return { "meta-edge-like", "tpu-edge-like", "tesla-npu-like" };
}

AcceleratorSpec PresetAccelerator(const std::string& name)
{
    // Shared normalization: 1024 MACs, 64 KiB local buffer per operand, 2 MiB global
    // buffer, relative access energies LB 1 / GB 10 / DRAM 100, MAC 0.5.
    AcceleratorSpec spec;
    spec.name = name;
    spec.pe.totalMacs = 1024;
    spec.pe.macCost = 0.5;
    if (name == "meta-edge-like")
    {
        spec.pe.unrolling = { { LoopDim::K, 32 }, { LoopDim::C, 2 }, { LoopDim::OX, 4 }, { LoopDim::OY, 4 } };
    }
    else if (name == "tpu-edge-like")
    {
        spec.pe.unrolling = { { LoopDim::K, 16 }, { LoopDim::C, 4 }, { LoopDim::OX, 16 } };
    }
    else if (name == "tesla-npu-like")
    {
        spec.pe.unrolling = { { LoopDim::K, 8 }, { LoopDim::OX, 16 }, { LoopDim::OY, 8 } };
    }
    else
    {
        throw ConfigError("unknown hardware preset '" + name + "'");
    }
    const int64_t kib = 1024;
    const double lbBandwidth = static_cast<double>(spec.pe.totalMacs);
    MemoryLevel lbW{ "LB_W", 64 * kib, 1.0, 1.0, lbBandwidth, true, false, false, false };
    MemoryLevel lbI{ "LB_I", 64 * kib, 1.0, 1.0, lbBandwidth, false, true, false, false };
    MemoryLevel lbO{ "LB_O", 64 * kib, 1.0, 1.0, lbBandwidth, false, false, true, false };
    MemoryLevel gb{ "GB", 2 * kib * kib, 10.0, 10.0, 32.0, true, true, true, true };
    MemoryLevel dram{ "DRAM", kUnboundedCapacity, 100.0, 100.0, 8.0, true, true, true, false };
    spec.levels = { lbW, lbI, lbO, gb, dram };
    return spec;
}

double Utilization(const std::map<LoopDim, int64_t>& tile, const PEArray& pe)
{
    double u = 1.0;
    for (const auto& [dim, factor] : pe.unrolling)
    {
        auto it = tile.find(dim);
        if (it == tile.end())
        {
            continue;
        }
        int64_t used = std::min(std::max<int64_t>(it->second, 1), factor);
        u *= static_cast<double>(used) / static_cast<double>(factor);
    }
    return u;
}

bool Fits(const MemoryLevel& level, int64_t bytes)
{
    return bytes <= level.capacityBytes;
}

}   // namespace causalflow
