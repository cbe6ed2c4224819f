// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#include "ldm3d/cli/commands.hpp"

int main(int argc, char** argv) { return ldm3d::cli::run(argc, argv); }
