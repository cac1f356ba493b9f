// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "flakelens/cli/cli.hpp"

int main(int argc, char** argv) {
    return flakelens::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
