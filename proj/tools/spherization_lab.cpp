// SPDX-License-Identifier: Apache-2.0
#include "spherization/cli.hpp"

int main(int argc, char** argv) { return spherization::cli::main_entry(argc, argv); }
