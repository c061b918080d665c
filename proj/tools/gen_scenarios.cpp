// Writes the shipped scenario files (scenarios/*.rdc) from the frozen
// blueprints and demos.

#include "rdc/catalog.hpp"

#include <cstdio>
#include <filesystem>

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: gen_scenarios <dir>\n");
    return 1;
  }
  const std::filesystem::path dir = argv[1];
  std::filesystem::create_directories(dir);
  for (const rdc::CatalogEntry& e : rdc::shipped_scenarios()) {
    rdc::save_scenario(e.scenario, dir / e.file);
    std::printf("%s %s\n", e.file.c_str(), rdc::scenario_hash(e.scenario).c_str());
  }
}
