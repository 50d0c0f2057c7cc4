#include <iostream>

#include <CLI11.hpp>

#include "demo_data.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Write a synthetic manifest, tone clips, and a scripted mock backend"};
  std::string out;
  std::size_t individuals = 3;
  std::size_t clips = 2;
  app.add_option("out", out, "Output directory")->required();
  app.add_option("--individuals", individuals, "Number of individuals");
  app.add_option("--clips", clips, "Clips per individual");
  CLI11_PARSE(app, argc, argv);
  try {
    const auto p = gifts::demo::write_demo(out, individuals, clips);
    std::cout << "manifest: " << p.manifest.string() << "\nbackends: " << p.backends.string() << "\n";
  } catch (const gifts::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
