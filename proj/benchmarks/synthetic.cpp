#include "synthetic.hpp"

#include <ctxfix/semantic_retrieval.hpp>

#include <fmt/core.h>

namespace bench {

std::vector<ctxfix::SourceUnit> synthetic_project(std::size_t modules) {
    std::vector<ctxfix::SourceUnit> out;
    for (std::size_t m = 0; m < modules; ++m) {
        std::string text = "import os\n\nLIMIT = 10\n\n\n";
        for (std::size_t c = 0; c < 3; ++c) {
            text += fmt::format("class Worker{}_{}:\n    \"\"\"Handles batch {}.\"\"\"\n    size = {}\n\n", m, c, c, c);
            text += "    def __init__(self, path):\n        self.path = path\n\n";
            for (std::size_t f = 0; f < 4; ++f) {
                text += fmt::format("    def step_{}(self, value, scale=1):\n        return value * scale + {}\n\n", f, f);
            }
            text += "\n";
        }
        for (std::size_t f = 0; f < 3; ++f) {
            text += fmt::format("def helper_{}(items):\n    return [os.path.join('x', i) for i in items]\n\n\n", f);
        }
        out.push_back({fmt::format("pkg{}/mod{}.py", m % 5, m), std::move(text)});
    }
    return out;
}

ctxfix::ProjectDatabase synthetic_database(std::size_t modules, std::size_t dim) {
    ctxfix::LocalHashEncoder enc(dim);
    return ctxfix::build_database(synthetic_project(modules), enc);
}

} // namespace bench
