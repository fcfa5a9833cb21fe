#include "mre/dataset.hpp"

#include <fstream>

#include <json.hpp>

#include "mre/errors.hpp"

namespace mre {

using nlohmann::json;

namespace {

constexpr std::array<const char*, kModalityCount> kFeatureKeys = {"vision", "audio", "text"};
constexpr std::array<const char*, kModalityCount> kLabelKeys = {"label_v", "label_a", "label_t"};

std::string at_line(std::size_t line) { return "line " + std::to_string(line) + ": "; }

const json& required(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end())
    throw ParseError(at_line(line) + "missing required key \"" + std::string(key) + "\"");
  return *it;
}

int parse_label(const json& v, const char* key, std::size_t line) {
  if (!v.is_number_integer())
    throw ParseError(at_line(line) + "\"" + std::string(key) + "\" must be an integer");
  const auto value = v.get<long long>();
  if (value < 0) throw ParseError(at_line(line) + "\"" + std::string(key) + "\" is negative");
  return static_cast<int>(value);
}

Matrix parse_matrix(const json& v, const char* key, std::size_t line) {
  if (!v.is_array() || v.empty())
    throw ParseError(at_line(line) + "\"" + std::string(key) + "\" must be a non-empty array of rows");
  Matrix m;
  m.rows = v.size();
  for (std::size_t r = 0; r < v.size(); ++r) {
    const json& row = v[r];
    if (!row.is_array() || row.empty())
      throw ParseError(at_line(line) + "\"" + std::string(key) + "\" row " + std::to_string(r) +
                       " is not a non-empty array");
    if (r == 0) m.cols = row.size();
    if (row.size() != m.cols)
      throw ParseError(at_line(line) + "\"" + std::string(key) + "\" is ragged: row " +
                       std::to_string(r) + " has " + std::to_string(row.size()) +
                       " values, expected " + std::to_string(m.cols));
    for (const json& x : row) {
      if (!x.is_number())
        throw ParseError(at_line(line) + "\"" + std::string(key) + "\" holds a non-number");
      m.values.push_back(x.get<double>());
    }
  }
  return m;
}

InstanceBag parse_instance(const json& obj, std::size_t line) {
  if (!obj.is_object()) throw ParseError(at_line(line) + "expected a JSON object");
  InstanceBag bag;
  const json& id = required(obj, "id", line);
  if (!id.is_string()) throw ParseError(at_line(line) + "\"id\" must be a string");
  bag.id = id.get<std::string>();
  bag.label = parse_label(required(obj, "label", line), "label", line);
  bag.vision = parse_matrix(required(obj, "vision", line), "vision", line);
  bag.audio = parse_matrix(required(obj, "audio", line), "audio", line);
  bag.text = parse_matrix(required(obj, "text", line), "text", line);
  std::array<std::optional<int>*, kModalityCount> labels{&bag.label_v, &bag.label_a, &bag.label_t};
  for (std::size_t m = 0; m < kModalityCount; ++m) {
    auto it = obj.find(kLabelKeys[m]);
    if (it != obj.end() && !it->is_null()) *labels[m] = parse_label(*it, kLabelKeys[m], line);
  }
  return bag;
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows; ++r)
    rows.push_back(std::vector<double>(m.values.begin() + r * m.cols,
                                       m.values.begin() + (r + 1) * m.cols));
  return rows;
}

}  // namespace

const Matrix& InstanceBag::features(Modality m) const {
  switch (m) {
    case Modality::vision: return vision;
    case Modality::audio: return audio;
    case Modality::text: return text;
  }
  throw ContractError("unknown modality");
}

std::optional<int> InstanceBag::modality_label(Modality m) const {
  switch (m) {
    case Modality::vision: return label_v;
    case Modality::audio: return label_a;
    case Modality::text: return label_t;
  }
  return std::nullopt;
}

std::filesystem::path manifest_path(const std::filesystem::path& data) {
  std::filesystem::path p = data;
  p.replace_extension(".manifest.json");
  return p;
}

Dataset parse_dataset(std::istream& in, std::optional<std::size_t> classes) {
  Dataset data;
  std::string text;
  std::size_t line = 0;
  int max_label = -1;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(at_line(line) + "invalid JSON (" + e.what() + ")");
    }
    InstanceBag bag = parse_instance(obj, line);
    std::array<std::size_t, kModalityCount> dims{bag.vision.cols, bag.audio.cols, bag.text.cols};
    if (data.samples.empty()) {
      data.manifest.dims = dims;
    } else if (dims != data.manifest.dims) {
      throw ValidationError(at_line(line) + "feature widths differ from earlier samples");
    }
    max_label = std::max(max_label, bag.label);
    for (auto m : kModalities)
      if (auto l = bag.modality_label(m)) max_label = std::max(max_label, *l);
    data.samples.push_back(std::move(bag));
  }
  if (data.samples.empty()) throw ValidationError("dataset contains no samples");
  data.manifest.n = data.samples.size();
  data.manifest.classes =
      classes ? *classes : std::max<std::size_t>(2, static_cast<std::size_t>(max_label + 1));
  if (static_cast<std::size_t>(max_label) >= data.manifest.classes)
    throw ValidationError("label " + std::to_string(max_label) + " outside [0, " +
                          std::to_string(data.manifest.classes) + ")");
  return data;
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dataset " + path.string());
  std::optional<std::size_t> classes;
  const auto mpath = manifest_path(path);
  if (std::filesystem::exists(mpath)) {
    std::ifstream min(mpath);
    try {
      classes = json::parse(min).at("classes").get<std::size_t>();
    } catch (const json::exception& e) {
      throw ParseError("manifest " + mpath.string() + ": " + e.what());
    }
  }
  return parse_dataset(in, classes);
}

void write_dataset(std::ostream& out, const Dataset& data) {
  for (const auto& bag : data.samples) {
    json obj;
    obj["id"] = bag.id;
    obj["label"] = bag.label;
    std::array<const std::optional<int>*, kModalityCount> labels{&bag.label_v, &bag.label_a,
                                                                 &bag.label_t};
    for (std::size_t m = 0; m < kModalityCount; ++m)
      if (*labels[m]) obj[kLabelKeys[m]] = **labels[m];
    for (auto m : kModalities)
      obj[kFeatureKeys[static_cast<std::size_t>(m)]] = matrix_json(bag.features(m));
    out << obj.dump() << '\n';
  }
}

void save_dataset(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write dataset " + path.string());
  write_dataset(out, data);
  std::ofstream mout(manifest_path(path));
  json manifest{{"n", data.samples.size()},
                {"classes", data.manifest.classes},
                {"dims", data.manifest.dims}};
  mout << manifest.dump(2) << '\n';
}

}  // namespace mre
