// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace flakelens::cli {

enum ExitStatus : int {
    kOk = 0,
    /// Bad input, missing file, failed run.
    kOperationalError = 1,
    /// Bad flags.
    kUsageError = 2,
};

/// Runs one command line. args[0] is the program name. Data goes to `out`,
/// diagnostics and usage text to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace flakelens::cli
