// Copyright 2026 The lorentz-bg Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Acceptance run: every numbered gate at full scale, one line per gate.
// Usage: acceptance [output-dir] [--quick]

#include <cstring>
#include <iostream>
#include <string>

#include "lorentz/acceptance.hpp"
#include "lorentz/rng.hpp"

int main(int argc, char **argv)
{
    std::string out = "acceptance-out";
    lorentz::ExperimentConfig cfg;
    cfg.kind = "verify";
    cfg.profile = "full";
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--quick") == 0)
            cfg.profile = "quick";
        else
            out = argv[i];
    }
    cfg.out_dir = out;
    if (!lorentz::rng_self_test()) {
        std::cout << "random stream self-test failed\n";
        return 1;
    }
    std::cout << "acceptance: profile " << cfg.profile << ", seed " << cfg.seed << ", output " << out << std::endl;
    auto outcome = lorentz::acceptance::run_verify(cfg, out, 0, [](const auto &r) {
        std::cout << lorentz::acceptance::format_line(r) << std::endl;
    });
    int passed = 0;
    for (const auto &r : outcome.results)
        passed += r.pass;
    std::cout << passed << "/" << outcome.results.size() << " criteria passed" << std::endl;
    return outcome.all_pass ? 0 : 1;
}
