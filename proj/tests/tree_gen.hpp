#pragma once

// Random rooted trees for the taxonomy metric property suites.

#include <random>
#include <string>

#include "privtrace/taxonomy.hpp"

namespace fixtures {

inline privtrace::Taxonomy random_tree(std::mt19937_64& rng, int nodes) {
    privtrace::Taxonomy t("t");
    t.add_root("n0");
    for (int i = 1; i < nodes; ++i) {
        std::uniform_int_distribution<int> parent(0, i - 1);
        t.add_node("n" + std::to_string(i), "n" + std::to_string(parent(rng)));
    }
    return t;
}

}  // namespace fixtures
