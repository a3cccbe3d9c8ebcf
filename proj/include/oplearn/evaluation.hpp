#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "oplearn/config.hpp"
#include "oplearn/dataset.hpp"
#include "oplearn/mionet.hpp"
#include "oplearn/reference.hpp"

namespace oplearn {

struct ErrorReport {
  double rel_l2 = 0.0;
  double rel_l1 = 0.0;
  double max_err = 0.0;
  std::string grid;     // e.g. "201x101"
  std::string case_id;
};

/// Unweighted discrete norms over all values; complex fields are passed stacked (re, im rows).
/// Throws std::invalid_argument on a shape mismatch or a zero reference.
ErrorReport error_report(const Eigen::MatrixXd& u_h, const Eigen::MatrixXd& u_ref);

std::string grid_descriptor(const SpaceTimeGrid& grid);

/// Model prediction on a reference's grid scored against it.
ErrorReport score(const OperatorModel& model, const std::vector<Eigen::VectorXd>& sensors,
                  const ReferenceField& reference);

struct MultiTargetReport {
  std::vector<double> thetas;
  std::vector<ErrorReport> reports;
  ErrorReport mean;
};

/// One report per target source (burgers-multi) plus the per-metric mean.
MultiTargetReport multi_target_report(const OperatorModel& model, const ExperimentConfig& cfg,
                                      const SensorLayout& layout, const std::vector<ReferenceField>& references);

}  // namespace oplearn
