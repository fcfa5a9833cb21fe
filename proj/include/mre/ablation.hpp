#pragma once

// Loss ablation: the same configuration and seeds trained four times with the
// auxiliary losses switched off and on.

#include <string>
#include <vector>

#include "mre/train.hpp"

namespace mre {

struct AblationVariant {
  std::string name;
  double lambda_rs = 0.0;
  double lambda_cnce = 0.0;
};

struct AblationRow {
  AblationVariant variant;
  RunReport report;
};

// Baseline (0, 0), L_rs (cfg.lambda_rs, 0), L_cnce (0, cfg.lambda_cnce) and
// L_rs + L_cnce (cfg.lambda_rs, cfg.lambda_cnce), in that order.
std::vector<AblationVariant> ablation_variants(const TrainConfig& cfg);

// cfg with only the loss coefficients replaced.
TrainConfig variant_config(const TrainConfig& cfg, const AblationVariant& v);

std::vector<AblationRow> ablation_run(const TrainConfig& cfg, const Dataset& data,
                                      const Progress& progress = {});

// Columns: variant,lambda_rs,lambda_cnce,acc_mean,acc_std,f1_mean,f1_std (metrics in percent).
std::string ablation_csv(const std::vector<AblationRow>& rows);
std::string ablation_markdown(const std::vector<AblationRow>& rows);

}  // namespace mre
