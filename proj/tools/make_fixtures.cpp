// Writes the standard fixture suite as <dir>/<id>.json.
#include <filesystem>
#include <iostream>

#include "cli/cli.hpp"
#include "mdual/errors.hpp"
#include "mdual/fixtures.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: mdual_make_fixtures <output-dir>\n";
    return 1;
  }
  try {
    std::filesystem::create_directories(argv[1]);
    for (const auto& [id, json] : mdual::standard_fixtures()) {
      const auto path = std::filesystem::path(argv[1]) / (id + ".json");
      mdual::cli::write_atomically(path.string(), mdual::dump_json(json));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
