#pragma once

#include "kmsf/graph.hpp"

#include <string>

#ifndef KMSF_FIXTURES_DIR
#error "KMSF_FIXTURES_DIR must point at fixtures/"
#endif

inline kmsf::GraphFamily fixture(const std::string& name) {
  return kmsf::load_graph_file(std::string(KMSF_FIXTURES_DIR) + "/" + name + ".kgf");
}

// n parallel loops on one vertex, all with potential f.
inline kmsf::GraphFamily loops(int n, const std::string& f = "1") {
  std::string text = "[graph]\nkind = explicit\nrationals = true\nvertex v\n";
  for (int i = 0; i < n; ++i) text += "arrow v v " + f + "\n";
  return kmsf::parse_graph(text);
}
