#pragma once

// Multimodal feature datasets in JSON Lines form. Each line is one object:
//   {"id": "...", "label": 2, "label_v": 2, "label_a": 0, "label_t": 2,
//    "vision": [[...], ...], "audio": [[...], ...], "text": [[...], ...]}
// with label_v/label_a/label_t optional and each modality a row-major T x d
// array. A manifest {"n", "classes", "dims"} is stored next to the data file.

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mre/matrix.hpp"
#include "mre/relevance.hpp"

namespace mre {

struct InstanceBag {
  std::string id;
  Matrix vision;
  Matrix audio;
  Matrix text;
  int label = 0;
  std::optional<int> label_v;
  std::optional<int> label_a;
  std::optional<int> label_t;

  const Matrix& features(Modality m) const;
  std::optional<int> modality_label(Modality m) const;
  bool operator==(const InstanceBag&) const = default;
};

struct DatasetManifest {
  std::size_t n = 0;
  std::size_t classes = 0;
  std::array<std::size_t, kModalityCount> dims{};
  bool operator==(const DatasetManifest&) const = default;
};

struct Dataset {
  std::vector<InstanceBag> samples;
  DatasetManifest manifest;
};

// data.jsonl -> data.manifest.json
std::filesystem::path manifest_path(const std::filesystem::path& data);

// Parses JSONL text. When classes is unset it is inferred as max label + 1
// (at least 2). Throws ParseError (with 1-based line number) on malformed
// lines and ValidationError on inconsistent widths or labels.
Dataset parse_dataset(std::istream& in, std::optional<std::size_t> classes = std::nullopt);

// Reads the data file and, if present, its manifest for the class count.
Dataset load_dataset(const std::filesystem::path& path);

void write_dataset(std::ostream& out, const Dataset& data);
// Writes the JSONL file and its manifest.
void save_dataset(const std::filesystem::path& path, const Dataset& data);

}  // namespace mre
