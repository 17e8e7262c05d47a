//
// Copyright © 2026 The causalflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "causalflow/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return causalflow::RunCli(argc, argv, std::cout, std::cerr);
}
