#include "mre/ablation.hpp"

#include <iomanip>
#include <sstream>

namespace mre {

std::vector<AblationVariant> ablation_variants(const TrainConfig& cfg) {
  return {{"Baseline", 0.0, 0.0},
          {"L_rs", cfg.lambda_rs, 0.0},
          {"L_cnce", 0.0, cfg.lambda_cnce},
          {"L_rs + L_cnce", cfg.lambda_rs, cfg.lambda_cnce}};
}

TrainConfig variant_config(const TrainConfig& cfg, const AblationVariant& v) {
  TrainConfig out = cfg;
  out.lambda_rs = v.lambda_rs;
  out.lambda_cnce = v.lambda_cnce;
  return out;
}

std::vector<AblationRow> ablation_run(const TrainConfig& cfg, const Dataset& data,
                                      const Progress& progress) {
  std::vector<AblationRow> rows;
  for (const auto& v : ablation_variants(cfg)) {
    if (progress) progress("variant " + v.name);
    rows.push_back({v, run_seeds(variant_config(cfg, v), data, progress)});
  }
  return rows;
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
  std::ostringstream os;
  os << "variant,lambda_rs,lambda_cnce,acc_mean,acc_std,f1_mean,f1_std\n";
  os << std::setprecision(10);
  for (const auto& r : rows)
    os << r.variant.name << ',' << r.variant.lambda_rs << ',' << r.variant.lambda_cnce << ','
       << 100.0 * r.report.accuracy.mean << ',' << 100.0 * r.report.accuracy.std << ','
       << 100.0 * r.report.f1.mean << ',' << 100.0 * r.report.f1.std << '\n';
  return os.str();
}

std::string ablation_markdown(const std::vector<AblationRow>& rows) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << "| Tasks           | Acc            | F1-Score       |\n";
  os << "|-----------------|----------------|----------------|\n";
  for (const auto& r : rows) {
    std::ostringstream acc, f1;
    acc << std::fixed << std::setprecision(2) << 100.0 * r.report.accuracy.mean << " ± "
        << 100.0 * r.report.accuracy.std;
    f1 << std::fixed << std::setprecision(2) << 100.0 * r.report.f1.mean << " ± "
       << 100.0 * r.report.f1.std;
    os << "| " << std::left << std::setw(15) << r.variant.name << " | " << std::setw(14)
       << acc.str() << " | " << std::setw(14) << f1.str() << " |\n";
  }
  return os.str();
}

}  // namespace mre
