#pragma once

// Cross-modal consistency statistics for datasets that carry per-modality
// labels: how often a modality expresses the same class as the bag label.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mre/dataset.hpp"

namespace mre {

struct ModalityConsistency {
  Modality modality = Modality::vision;
  // counts[i][j]: samples with bag label i and modality label j.
  std::vector<std::vector<std::size_t>> counts;
  std::size_t labelled = 0;
  std::size_t missing = 0;  // samples without a label for this modality
  std::optional<double> consistency;                 // trace / labelled
  std::optional<double> consistency_without_neutral;  // rows and columns of the neutral class dropped
};

struct RelevanceReport {
  std::size_t classes = 0;
  std::optional<int> neutral_class;
  std::vector<ModalityConsistency> modalities;
};

RelevanceReport relevance_report(const Dataset& data, std::optional<int> neutral_class = {});

// "visual consistency: 88.72%" style lines, plus coverage gaps.
std::string format_relevance_report(const RelevanceReport& report);
nlohmann::json to_json(const RelevanceReport& report);

}  // namespace mre
