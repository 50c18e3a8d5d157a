// Copyright 2026 The qslkit Authors
// SPDX-License-Identifier: Apache-2.0

fn main() {
    std::process::exit(qslkit::cli::main_with_args(std::env::args_os().collect()));
}
