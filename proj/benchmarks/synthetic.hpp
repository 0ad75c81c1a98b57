#pragma once

#include <ctxfix/context_index.hpp>

#include <cstddef>
#include <vector>

namespace bench {

// `modules` files, each with a few classes, methods, and top-level helpers.
std::vector<ctxfix::SourceUnit> synthetic_project(std::size_t modules);

ctxfix::ProjectDatabase synthetic_database(std::size_t modules, std::size_t dim = 256);

} // namespace bench
