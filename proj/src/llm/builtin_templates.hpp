#pragma once

#include <vector>

namespace vsql::llm::detail {

struct BuiltinVariant {
  const char* name;
  const char* view_creation;
  const char* dummy_generation;
  const char* reconstruction;
};

const std::vector<BuiltinVariant>& builtin_variants();

}  // namespace vsql::llm::detail
