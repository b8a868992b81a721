// SPDX-License-Identifier: MIT
#include "lrfmtc/cli.hpp"

int main(int argc, char** argv) { return lrfmtc::cli_main(argc, argv); }
