// Regenerates tests/fixtures/pipeline/script.json and the golden MoCoT traces
// by running every fixture config against the rule-based responder.
//
//   make_fixtures <fixture-dir> <golden-dir>

#include <fstream>
#include <iostream>
#include <memory>

#include "../support/fixture_responder.hpp"
#include "mocot/backend/mock_backend.hpp"
#include "mocot/harness/experiment.hpp"

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: make_fixtures <fixture-dir> <golden-dir>\n";
    return 2;
  }
  const std::filesystem::path dir = argv[1];
  const std::filesystem::path golden = argv[2];
  auto recorder = std::make_shared<mocot::backend::RecordingBackend>(std::make_shared<fixtures::Responder>());

  for (const char* name : {"mocot", "direct-no-cot", "direct-cot", "grpo-tagged"}) {
    const auto config = mocot::harness::load_run_config(dir / (std::string(name) + ".json"));
    const auto artifacts =
        mocot::harness::run_experiment(config, *recorder, [&]() -> mocot::backend::ChatBackend& { return *recorder; });
    for (const auto& sample : artifacts.samples) {
      if (sample.error) {
        std::cerr << name << " " << sample.id << ": " << *sample.error << "\n";
        return 1;
      }
    }
    if (std::string(name) == "mocot") {
      std::ofstream out(golden / "pipeline_traces.jsonl", std::ios::trunc);
      for (const auto& sample : artifacts.samples) out << sample.output.dump() << "\n";
    }
  }
  recorder->write(dir / "script.json");
  std::cout << "recorded " << recorder->entries().size() << " exchanges\n";
  return 0;
}
