#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mocot/pipeline/instance.hpp"

namespace mocot::harness {

enum class DatasetFormat { mcq_jsonl, open_ended_jsonl };
enum class Split { train, validation, evaluation };

DatasetFormat dataset_format_from_string(std::string_view name);
std::string_view to_string(DatasetFormat format);
Split split_from_string(std::string_view name);
std::string_view to_string(Split split);

struct DatasetSpec {
  std::string name;
  std::filesystem::path path;
  DatasetFormat format = DatasetFormat::mcq_jsonl;
  Split split = Split::evaluation;
};

/// Schema or uniqueness violation; `row` is the 1-based line number.
class DatasetError : public std::runtime_error {
 public:
  DatasetError(std::size_t row, const std::string& message);
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

/// One JSONL row: {id, image, question, options: [{label, text}], gold, lang?}.
/// Open-ended rows carry no options and a reference text as gold. Relative
/// image paths resolve against `base_dir`; http(s) and data URLs pass through.
pipeline::CVQAInstance parse_instance(const nlohmann::json& row, DatasetFormat format,
                                      const std::filesystem::path& base_dir);

/// Throws DatasetError for a missing file, a malformed row or a repeated id.
std::vector<pipeline::CVQAInstance> load_dataset(const DatasetSpec& spec);

struct SplitResult {
  std::vector<pipeline::CVQAInstance> first;   // round(fraction·n) instances
  std::vector<pipeline::CVQAInstance> second;  // the rest
};

/// Seeded partition; each part keeps the input order.
SplitResult split_dataset(const std::vector<pipeline::CVQAInstance>& instances, double fraction, std::uint64_t seed);

/// Generation/evaluation split, then a train/validation split of the
/// generation part.
struct NestedSplit {
  std::vector<pipeline::CVQAInstance> train;
  std::vector<pipeline::CVQAInstance> validation;
  std::vector<pipeline::CVQAInstance> evaluation;
};

NestedSplit nested_split(const std::vector<pipeline::CVQAInstance>& instances, double generation_fraction,
                         double train_fraction, std::uint64_t seed);

}  // namespace mocot::harness
