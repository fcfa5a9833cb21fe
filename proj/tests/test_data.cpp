#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <set>
#include <sstream>

#include "mre/dataset.hpp"
#include "mre/errors.hpp"
#include "mre/split.hpp"
#include "mre/synth.hpp"

using namespace mre;
namespace fs = std::filesystem;

namespace {

const char* kLine =
    R"({"id": "a1", "label": 1, "label_v": 1, "label_a": 0,)"
    R"( "vision": [[0.1, 0.2], [0.30000000000000004, -1e-300]],)"
    R"( "audio": [[1, 2, 3]], "text": [[5e10], [-0.5], [7]]})";

std::string drop_key(std::string line, const std::string& key) {
  const auto pos = line.find("\"" + key + "\"");
  const auto end = line.find(']', line.find(']', pos) + 1);
  const auto close = key == "audio" ? line.find(']', pos) + 2 : end + 1;
  line.erase(pos, close - pos + 2);
  return line;
}

std::string error_of(const std::string& text) {
  std::istringstream in(text);
  try {
    parse_dataset(in);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("a single line parses to bit-equal values") {
  std::istringstream in(kLine);
  Dataset d = parse_dataset(in);
  REQUIRE(d.samples.size() == 1);
  const InstanceBag& s = d.samples[0];
  CHECK(s.id == "a1");
  CHECK(s.label == 1);
  CHECK(s.label_v == 1);
  CHECK(s.label_a == 0);
  CHECK(!s.label_t);
  CHECK(s.vision.rows == 2);
  CHECK(s.vision.cols == 2);
  CHECK(s.vision(1, 0) == 0.30000000000000004);
  CHECK(s.vision(1, 1) == -1e-300);
  CHECK(s.text(0, 0) == 5e10);
  CHECK(d.manifest.n == 1);
  CHECK(d.manifest.classes == 2);
  CHECK(d.manifest.dims == std::array<std::size_t, 3>{2, 3, 1});
}

TEST_CASE("missing key names the key and line") {
  const std::string no_audio = drop_key(kLine, "audio");
  REQUIRE(no_audio.find("audio") == std::string::npos);
  const std::string msg = error_of(no_audio);
  CHECK(msg.find("\"audio\"") != std::string::npos);
  CHECK(msg.find("line 1") != std::string::npos);

  const std::string second = error_of(std::string(kLine) + "\n" + drop_key(kLine, "audio"));
  CHECK(second.find("line 2") != std::string::npos);
}

TEST_CASE("malformed inputs") {
  std::string ragged = kLine;
  ragged.replace(ragged.find("[0.1, 0.2]"), 10, "[0.1]");
  std::istringstream r(ragged);
  CHECK_THROWS_AS(parse_dataset(r), ParseError);

  std::string narrow = kLine;
  narrow.replace(narrow.find("[[1, 2, 3]]"), 11, "[[1, 2]]");
  std::istringstream w(std::string(kLine) + "\n" + narrow);
  CHECK_THROWS_AS(parse_dataset(w), ValidationError);

  std::istringstream garbage("{not json");
  CHECK_THROWS_AS(parse_dataset(garbage), ParseError);

  std::string empty_seq = kLine;
  empty_seq.replace(empty_seq.find("[[1, 2, 3]]"), 11, "[]");
  std::istringstream e(empty_seq);
  CHECK_THROWS_AS(parse_dataset(e), Error);

  std::istringstream bad_label(kLine);
  CHECK_THROWS_AS(parse_dataset(bad_label, 1), Error);
}

TEST_CASE("write then read reproduces a generated dataset exactly") {
  SynthConfig sc;
  sc.n_samples = 50;
  sc.seed = 3;
  Dataset d = synth_generate(sc);
  std::stringstream buf;
  write_dataset(buf, d);
  Dataset back = parse_dataset(buf, d.manifest.classes);
  CHECK(back.samples == d.samples);
  CHECK(back.manifest == d.manifest);

  const fs::path dir = fs::temp_directory_path() / "mre_test_data";
  fs::create_directories(dir);
  const fs::path file = dir / "set.jsonl";
  save_dataset(file, d);
  CHECK(fs::exists(manifest_path(file)));
  CHECK(manifest_path(file).filename() == "set.manifest.json");
  Dataset loaded = load_dataset(file);
  CHECK(loaded.samples == d.samples);
  CHECK(loaded.manifest == d.manifest);
  fs::remove_all(dir);
}

TEST_CASE("synthetic generator label structure") {
  SynthConfig sc;
  sc.n_samples = 300;
  sc.p_irrelevant = {0, 0, 0};
  for (const auto& s : synth_generate(sc).samples) {
    CHECK(s.label_v == s.label);
    CHECK(s.label_a == s.label);
    CHECK(s.label_t == s.label);
  }
  sc.p_irrelevant = {1, 1, 1};
  for (const auto& s : synth_generate(sc).samples) {
    CHECK(s.label_v != s.label);
    CHECK(s.label_a != s.label);
    CHECK(s.label_t != s.label);
  }
}

TEST_CASE("synthetic consistency follows the corruption probability") {
  SynthConfig sc;
  sc.n_samples = 10000;
  sc.seq_lengths = {1, 1, 1};
  sc.dims = {1, 1, 1};
  Dataset d = synth_generate(sc);
  for (auto m : kModalities) {
    std::size_t same = 0;
    for (const auto& s : d.samples) same += s.modality_label(m) == s.label;
    CHECK(std::abs(static_cast<double>(same) / 10000.0 - 0.7) < 0.02);
  }
}

TEST_CASE("noise-free clean synthetic samples of one class are identical") {
  SynthConfig sc;
  sc.n_samples = 200;
  sc.noise = 0.0;
  sc.p_irrelevant = {0, 0, 0};
  Dataset d = synth_generate(sc);
  for (std::size_t i = 1; i < d.samples.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (d.samples[i].label == d.samples[j].label) {
        CHECK(d.samples[i].vision == d.samples[j].vision);
        CHECK(d.samples[i].text == d.samples[j].text);
      } else {
        CHECK(d.samples[i].audio != d.samples[j].audio);
      }
}

TEST_CASE("synthetic generator is deterministic and validates") {
  SynthConfig sc;
  sc.n_samples = 40;
  CHECK(synth_generate(sc).samples == synth_generate(sc).samples);
  SynthConfig other = sc;
  other.seed = 1;
  CHECK(synth_generate(other).samples != synth_generate(sc).samples);
  SynthConfig one_class = sc;
  one_class.classes = 1;
  CHECK_THROWS_AS(synth_generate(one_class), ContractError);
  SynthConfig bad_p = sc;
  bad_p.p_irrelevant[1] = 1.5;
  CHECK_THROWS_AS(synth_generate(bad_p), ContractError);
  SynthConfig bad_noise = sc;
  bad_noise.noise = -1;
  CHECK_THROWS_AS(synth_generate(bad_noise), ContractError);
}

TEST_CASE("split sizes and partition") {
  DataSplit s = split_dataset(100, {}, 0);
  CHECK(s.train.size() == 80);
  CHECK(s.val.size() == 10);
  CHECK(s.test.size() == 10);
  std::vector<std::size_t> all = s.train;
  all.insert(all.end(), s.val.begin(), s.val.end());
  all.insert(all.end(), s.test.begin(), s.test.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < 100; ++i) CHECK(all[i] == i);

  CHECK_THROWS_AS(split_dataset(100, {0.8, 0.1, 0.2}, 0), ConfigError);
  CHECK_THROWS_AS(split_dataset(5, {0.9, 0.05, 0.05}, 0), ConfigError);
}

TEST_CASE("batch streams are deterministic and seed dependent") {
  const DataSplit s = split_dataset(100, {}, 0);
  BatchStream a(s, 16, 5), b(s, 16, 5), c(s, 16, 6);
  CHECK(a.train_epoch(0) == b.train_epoch(0));
  CHECK(a.train_epoch(3) == b.train_epoch(3));
  CHECK(a.train_epoch(0) != a.train_epoch(1));
  CHECK(a.train_epoch(0) != c.train_epoch(0));

  auto flatten = [](const Batches& bs) {
    std::multiset<std::size_t> out;
    for (const auto& batch : bs) out.insert(batch.begin(), batch.end());
    return out;
  };
  CHECK(flatten(a.train_epoch(0)) == flatten(c.train_epoch(0)));
  CHECK(flatten(a.train_epoch(0)) ==
        std::multiset<std::size_t>(s.train.begin(), s.train.end()));
  const Batches e = a.train_epoch(0);
  CHECK(e.size() == 5);
  CHECK(e.back().size() == 16);
  CHECK(a.val_batches() == make_batches(s.val, 16));

  const DataSplit s2 = split_dataset(100, {}, 1);
  CHECK(s2.train != s.train);
}
