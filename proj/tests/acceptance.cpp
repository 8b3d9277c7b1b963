#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hopfns/verify.hpp"

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria"};
    int only = 0;
    std::uint64_t seed = hopfns::VerifyOptions{}.seed;
    app.add_option("--only", only, "run a single criterion (1-10)")->check(CLI::Range(1, hopfns::kCriteriaCount));
    app.add_option("--seed", seed, "seed for randomized criteria");
    CLI11_PARSE(app, argc, argv);

    hopfns::VerifyOptions opt;
    opt.seed = seed;
    bool ok = true;
    for (int i = 1; i <= hopfns::kCriteriaCount; ++i) {
        if (only != 0 && i != only) continue;
        const auto r = hopfns::run_criterion(i, opt);
        std::cout << hopfns::format_line(r) << std::endl;
        ok = ok && r.pass;
    }
    return ok ? EXIT_SUCCESS : EXIT_FAILURE;
}
