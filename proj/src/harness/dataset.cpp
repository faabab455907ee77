#include "mocot/harness/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "mocot/parse/errors.hpp"
#include "mocot/theory/stats.hpp"

namespace mocot::harness {

namespace fs = std::filesystem;
using nlohmann::json;
using pipeline::CVQAInstance;

DatasetFormat dataset_format_from_string(std::string_view name) {
  if (name == "mcq-jsonl") return DatasetFormat::mcq_jsonl;
  if (name == "open-ended-jsonl") return DatasetFormat::open_ended_jsonl;
  throw std::invalid_argument("unknown dataset format: " + std::string(name));
}

std::string_view to_string(DatasetFormat format) {
  return format == DatasetFormat::mcq_jsonl ? "mcq-jsonl" : "open-ended-jsonl";
}

Split split_from_string(std::string_view name) {
  if (name == "train") return Split::train;
  if (name == "validation") return Split::validation;
  if (name == "evaluation") return Split::evaluation;
  throw std::invalid_argument("unknown split: " + std::string(name));
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::train:
      return "train";
    case Split::validation:
      return "validation";
    case Split::evaluation:
      return "evaluation";
  }
  return "evaluation";
}

DatasetError::DatasetError(std::size_t row, const std::string& message)
    : std::runtime_error(row == 0 ? message : "row " + std::to_string(row) + ": " + message), row_(row) {}

namespace {

const std::string& required_string(const json& row, const char* field) {
  if (!row.contains(field)) throw std::invalid_argument(std::string("missing field '") + field + "'");
  const auto& value = row[field];
  if (!value.is_string()) throw std::invalid_argument(std::string("field '") + field + "' must be a string");
  const auto& text = value.get_ref<const std::string&>();
  if (text.empty()) throw std::invalid_argument(std::string("field '") + field + "' is empty");
  return text;
}

backend::ImageRef image_ref(const std::string& value, const fs::path& base_dir) {
  backend::ImageRef image;
  if (value.rfind("http://", 0) == 0 || value.rfind("https://", 0) == 0) {
    image.source = backend::ImageRef::Source::url;
    image.value = value;
    return image;
  }
  if (value.rfind("data:", 0) == 0) {
    const auto comma = value.find(',');
    const auto meta = value.substr(5, comma == std::string::npos ? 0 : comma - 5);
    const auto semi = meta.find(";base64");
    if (comma == std::string::npos || semi == std::string::npos) {
      throw std::invalid_argument("image data URL must be base64 encoded");
    }
    image.source = backend::ImageRef::Source::base64_payload;
    image.media_type = meta.substr(0, semi);
    image.value = value.substr(comma + 1);
    return image;
  }
  fs::path path(value);
  if (path.is_relative()) path = base_dir / path;
  if (!fs::is_regular_file(path)) throw std::invalid_argument("image file not found: " + path.string());
  image.source = backend::ImageRef::Source::file_path;
  image.value = path.lexically_normal().string();
  return image;
}

}  // namespace

CVQAInstance parse_instance(const json& row, DatasetFormat format, const fs::path& base_dir) {
  if (!row.is_object()) throw std::invalid_argument("row is not a JSON object");
  CVQAInstance instance;
  instance.id = required_string(row, "id");
  instance.question = required_string(row, "question");
  instance.image = image_ref(required_string(row, "image"), base_dir);
  backend::validate(instance.image);
  const auto& gold = required_string(row, "gold");

  if (format == DatasetFormat::open_ended_jsonl) {
    if (row.contains("options") && !row["options"].empty()) {
      throw std::invalid_argument("open-ended rows carry no options");
    }
    instance.mode = pipeline::AnswerMode::open_ended;
    instance.gold = gold;
    return instance;
  }

  if (!row.contains("options") || !row["options"].is_array()) {
    throw std::invalid_argument("missing field 'options'");
  }
  const auto all_labels = parse::letter_labels(26);
  for (const auto& option : row["options"]) {
    if (!option.is_object()) throw std::invalid_argument("option must be an object {label, text}");
    const auto label = parse::normalize_option_label(required_string(option, "label"), all_labels);
    instance.options.push_back({label, required_string(option, "text")});
  }
  instance.mode = pipeline::AnswerMode::mcq;
  instance.gold = parse::normalize_option_label(gold, instance.labels()).str();
  pipeline::validate(instance);
  return instance;
}

std::vector<CVQAInstance> load_dataset(const DatasetSpec& spec) {
  std::ifstream in(spec.path);
  if (!in) throw DatasetError(0, "cannot open dataset file: " + spec.path.string());
  const auto base_dir = spec.path.parent_path();

  std::vector<CVQAInstance> instances;
  std::set<std::string> seen;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    CVQAInstance instance;
    try {
      instance = parse_instance(json::parse(line), spec.format, base_dir);
    } catch (const std::exception& e) {
      throw DatasetError(row, e.what());
    }
    if (!seen.insert(instance.id).second) throw DatasetError(row, "duplicate id '" + instance.id + "'");
    instances.push_back(std::move(instance));
  }
  return instances;
}

SplitResult split_dataset(const std::vector<CVQAInstance>& instances, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw std::invalid_argument("split fraction must lie in [0, 1]");
  const std::size_t n = instances.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    std::swap(order[i - 1], order[theory::uniform_index(rng, i)]);
  }
  const auto take = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  std::vector<bool> first(n, false);
  for (std::size_t i = 0; i < take; ++i) first[order[i]] = true;

  SplitResult result;
  for (std::size_t i = 0; i < n; ++i) (first[i] ? result.first : result.second).push_back(instances[i]);
  return result;
}

NestedSplit nested_split(const std::vector<CVQAInstance>& instances, double generation_fraction,
                         double train_fraction, std::uint64_t seed) {
  auto outer = split_dataset(instances, generation_fraction, seed);
  auto inner = split_dataset(outer.first, train_fraction, theory::mix64(seed + 1));
  return {std::move(inner.first), std::move(inner.second), std::move(outer.second)};
}

}  // namespace mocot::harness
