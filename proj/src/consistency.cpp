#include "mre/consistency.hpp"

#include <iomanip>
#include <sstream>

#include "mre/errors.hpp"

namespace mre {

namespace {

const char* adjective(Modality m) {
  switch (m) {
    case Modality::vision: return "visual";
    case Modality::audio: return "audio";
    case Modality::text: return "textual";
  }
  return "?";
}

std::string percent(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << 100.0 * v << '%';
  return os.str();
}

}  // namespace

RelevanceReport relevance_report(const Dataset& data, std::optional<int> neutral_class) {
  const std::size_t c = data.manifest.classes;
  if (neutral_class && (*neutral_class < 0 || static_cast<std::size_t>(*neutral_class) >= c))
    throw ConfigError("neutral class " + std::to_string(*neutral_class) + " outside [0, " +
                      std::to_string(c) + ")");
  RelevanceReport report;
  report.classes = c;
  report.neutral_class = neutral_class;
  for (auto m : kModalities) {
    ModalityConsistency mc;
    mc.modality = m;
    mc.counts.assign(c, std::vector<std::size_t>(c, 0));
    for (const auto& bag : data.samples) {
      const auto l = bag.modality_label(m);
      if (!l) {
        ++mc.missing;
        continue;
      }
      ++mc.counts[static_cast<std::size_t>(bag.label)][static_cast<std::size_t>(*l)];
      ++mc.labelled;
    }
    if (mc.labelled > 0) {
      std::size_t trace = 0;
      for (std::size_t i = 0; i < c; ++i) trace += mc.counts[i][i];
      mc.consistency = static_cast<double>(trace) / static_cast<double>(mc.labelled);
      if (neutral_class) {
        const auto nc = static_cast<std::size_t>(*neutral_class);
        std::size_t kept = 0, kept_trace = 0;
        for (std::size_t i = 0; i < c; ++i)
          for (std::size_t j = 0; j < c; ++j)
            if (i != nc && j != nc) {
              kept += mc.counts[i][j];
              if (i == j) kept_trace += mc.counts[i][j];
            }
        if (kept > 0)
          mc.consistency_without_neutral =
              static_cast<double>(kept_trace) / static_cast<double>(kept);
      }
    }
    report.modalities.push_back(std::move(mc));
  }
  return report;
}

std::string format_relevance_report(const RelevanceReport& report) {
  std::ostringstream os;
  for (const auto& mc : report.modalities) {
    const char* name = adjective(mc.modality);
    if (!mc.consistency) {
      os << name << " consistency: n/a (no " << modality_name(mc.modality) << " labels)\n";
      continue;
    }
    os << name << " consistency: " << percent(*mc.consistency) << '\n';
    if (mc.consistency_without_neutral)
      os << name << " consistency without neutral: " << percent(*mc.consistency_without_neutral)
         << '\n';
    if (mc.missing > 0)
      os << name << " coverage gap: " << mc.missing << " of " << (mc.missing + mc.labelled)
         << " samples unlabelled\n";
  }
  for (const auto& mc : report.modalities) {
    if (!mc.consistency) continue;
    os << '\n' << modality_name(mc.modality) << " confusion (rows: bag label, cols: "
       << modality_name(mc.modality) << " label)\n";
    for (const auto& row : mc.counts) {
      for (std::size_t j = 0; j < row.size(); ++j) os << (j ? " " : "") << std::setw(6) << row[j];
      os << '\n';
    }
  }
  return os.str();
}

nlohmann::json to_json(const RelevanceReport& report) {
  using nlohmann::json;
  json mods = json::array();
  for (const auto& mc : report.modalities) {
    json entry{{"modality", modality_name(mc.modality)},
               {"counts", mc.counts},
               {"labelled", mc.labelled},
               {"missing", mc.missing},
               {"consistency", mc.consistency ? json(*mc.consistency) : json(nullptr)}};
    if (report.neutral_class)
      entry["consistency_without_neutral"] = mc.consistency_without_neutral
                                                 ? json(*mc.consistency_without_neutral)
                                                 : json(nullptr);
    mods.push_back(std::move(entry));
  }
  json out{{"classes", report.classes}, {"modalities", mods}};
  if (report.neutral_class) out["neutral_class"] = *report.neutral_class;
  return out;
}

}  // namespace mre
