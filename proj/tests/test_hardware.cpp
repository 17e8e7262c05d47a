//
// Copyright © 2026 The causalflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "test_support.hpp"

#include "causalflow/hardware.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace causalflow;
using namespace causalflow::test;

namespace
{

std::string WithUnrolling(const std::string& unrolling)
{
    return R"({"name": "t", "pe": {"total_macs": 1024, "mac_cost": 0.5, "unrolling": )" + unrolling + R"(},
      "levels": [
        {"name": "LB", "capacity_bytes": 1024, "read_cost": 1, "write_cost": 1, "bandwidth_words_per_cycle": 64, "serves": ["W", "I", "O"]},
        {"name": "GB", "capacity_bytes": 2097152, "read_cost": 10, "write_cost": 10, "bandwidth_words_per_cycle": 32, "serves": ["W", "I", "O"], "is_global_buffer": true},
        {"name": "DRAM", "capacity_bytes": "unbounded", "read_cost": 100, "write_cost": 100, "bandwidth_words_per_cycle": 8, "serves": ["W", "I", "O"]}]})";
}

PEArray KC32()
{
    PEArray pe;
    pe.totalMacs = 1024;
    pe.unrolling = { { LoopDim::K, 32 }, { LoopDim::C, 32 } };
    return pe;
}

constexpr int64_t kMiB = 1024 * 1024;

}   // namespace

TEST(Hardware, MetaEdgePreset)
{
    AcceleratorSpec hw = PresetAccelerator("meta-edge-like");
    EXPECT_EQ(hw.pe.totalMacs, 1024);
    const MemoryLevel& gb = hw.levels[static_cast<size_t>(hw.GlobalBufferIndex())];
    EXPECT_EQ(gb.capacityBytes, 2 * kMiB);
    EXPECT_TRUE(hw.levels.back().Unbounded());
    EXPECT_EQ(hw.levels.back().name, "DRAM");
}

TEST(Hardware, PresetsShareEverythingButUnrolling)
{
    AcceleratorSpec ref = PresetAccelerator("meta-edge-like");
    for (const auto& name : PresetNames())
    {
        AcceleratorSpec hw = PresetAccelerator(name);
        EXPECT_EQ(hw.levels, ref.levels) << name;
        EXPECT_EQ(hw.pe.totalMacs, 1024) << name;
        int64_t product = 1;
        for (const auto& [dim, f] : hw.pe.unrolling)
        {
            product *= f;
        }
        EXPECT_EQ(product, 1024) << name;
    }
}

TEST(Hardware, ShippedConfigsMatchPresets)
{
    for (const auto& name : PresetNames())
    {
        AcceleratorSpec file = LoadAccelerator(SourceDir() + "/configs/hw/" + name + ".json");
        EXPECT_EQ(file, PresetAccelerator(name)) << name;
    }
}

TEST(Hardware, UnrollingProductChecked)
{
    EXPECT_NO_THROW(ParseAccelerator(WithUnrolling(R"([{"dim": "K", "factor": 32}, {"dim": "C", "factor": 32}])")));
    EXPECT_THROW(ParseAccelerator(WithUnrolling(R"([{"dim": "K", "factor": 32}, {"dim": "C", "factor": 16}])")),
                 ConfigError);
}

TEST(Hardware, RoundTripIsExact)
{
    for (const auto& name : PresetNames())
    {
        const std::string text = SerializeAccelerator(PresetAccelerator(name));
        AcceleratorSpec back = ParseAccelerator(text);
        EXPECT_EQ(back, PresetAccelerator(name));
        EXPECT_EQ(SerializeAccelerator(back), text);
    }
    AcceleratorSpec odd = ParseAccelerator(WithUnrolling(R"([{"dim": "K", "factor": 1024}])"));
    odd.levels[0].readCost = 0.1;
    odd.levels[1].writeCost = 1.0 / 3.0;
    EXPECT_EQ(ParseAccelerator(SerializeAccelerator(odd)), odd);
}

TEST(Hardware, RejectsBadLevels)
{
    std::string noGb = WithUnrolling(R"([{"dim": "K", "factor": 1024}])");
    noGb.replace(noGb.find(R"(, "is_global_buffer": true)"), std::string(R"(, "is_global_buffer": true)").size(), "");
    EXPECT_THROW(ParseAccelerator(noGb), ConfigError);
    EXPECT_THROW(PresetAccelerator("no-such-chip"), ConfigError);
}

TEST(Hardware, UtilizationExamples)
{
    const PEArray pe = KC32();
    EXPECT_DOUBLE_EQ(Utilization({ { LoopDim::K, 32 }, { LoopDim::C, 32 } }, pe), 1.0);
    EXPECT_DOUBLE_EQ(Utilization({ { LoopDim::K, 16 }, { LoopDim::C, 32 } }, pe), 0.5);
    PEArray ox;
    ox.totalMacs = 1024;
    ox.unrolling = { { LoopDim::K, 128 }, { LoopDim::OX, 8 } };
    EXPECT_DOUBLE_EQ(Utilization({ { LoopDim::OX, 1 } }, ox), 0.125);
    EXPECT_DOUBLE_EQ(Utilization({}, ox), 1.0);
}

TEST(Hardware, UtilizationMonotone)
{
    const PEArray pe = PresetAccelerator("meta-edge-like").pe;
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int64_t> ext(1, 40);
    for (int trial = 0; trial < 500; ++trial)
    {
        std::map<LoopDim, int64_t> tile;
        for (LoopDim d : { LoopDim::K, LoopDim::C, LoopDim::OX, LoopDim::OY })
        {
            tile[d] = ext(rng);
        }
        const double u = Utilization(tile, pe);
        EXPECT_GT(u, 0.0);
        EXPECT_LE(u, 1.0);
        for (auto& [d, v] : tile)
        {
            auto bigger = tile;
            bigger[d] = v + 1;
            EXPECT_GE(Utilization(bigger, pe), u);
        }
        std::map<LoopDim, int64_t> full;
        for (const auto& [d, f] : pe.unrolling)
        {
            full[d] = f + ext(rng);
        }
        EXPECT_DOUBLE_EQ(Utilization(full, pe), 1.0);
    }
}

TEST(Hardware, FitsExamples)
{
    const MemoryLevel gb = PresetAccelerator("meta-edge-like").levels[3];
    ASSERT_TRUE(gb.isGlobalBuffer);
    EXPECT_TRUE(Fits(gb, 1 * kMiB));
    EXPECT_TRUE(Fits(gb, 0));
    EXPECT_TRUE(Fits(gb, 2 * kMiB));
    EXPECT_FALSE(Fits(gb, 3 * kMiB));
    EXPECT_TRUE(Fits(PresetAccelerator("meta-edge-like").levels.back(), int64_t{ 1 } << 50));
}
