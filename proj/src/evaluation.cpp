#include "oplearn/evaluation.hpp"

#include <stdexcept>

namespace oplearn {

ErrorReport error_report(const Eigen::MatrixXd& u_h, const Eigen::MatrixXd& u_ref) {
  if (u_h.rows() != u_ref.rows() || u_h.cols() != u_ref.cols()) {
    throw std::invalid_argument("error_report: prediction and reference grids differ");
  }
  const double l2 = u_ref.norm();
  const double l1 = u_ref.cwiseAbs().sum();
  if (!(l2 > 0.0)) throw std::invalid_argument("error_report: reference field is identically zero");
  const Eigen::MatrixXd diff = u_h - u_ref;
  ErrorReport r;
  r.rel_l2 = diff.norm() / l2;
  r.rel_l1 = diff.cwiseAbs().sum() / l1;
  r.max_err = diff.size() == 0 ? 0.0 : diff.cwiseAbs().maxCoeff();
  return r;
}

std::string grid_descriptor(const SpaceTimeGrid& grid) {
  std::string s;
  for (const auto& a : grid.space) s += std::to_string(a.count) + "x";
  return s + std::to_string(grid.time.count);
}

ErrorReport score(const OperatorModel& model, const std::vector<Eigen::VectorXd>& sensors,
                  const ReferenceField& reference) {
  const Eigen::MatrixXd pred = predict_field(model, sensors, reference.grid.locations());
  ErrorReport r = error_report(pred, reference.values);
  r.grid = grid_descriptor(reference.grid);
  return r;
}

MultiTargetReport multi_target_report(const OperatorModel& model, const ExperimentConfig& cfg,
                                      const SensorLayout& layout, const std::vector<ReferenceField>& references) {
  const TargetFunctions tf = target_functions(cfg.case_id, cfg.target_options());
  if (references.size() != tf.sources.size()) {
    throw std::invalid_argument("multi_target_report: need one reference per target source");
  }
  MultiTargetReport out;
  out.thetas = tf.thetas;
  for (std::size_t i = 0; i < references.size(); ++i) {
    ErrorReport r = score(model, target_sensor_inputs(cfg, layout, i), references[i]);
    r.case_id = case_name(cfg.case_id);
    out.mean.rel_l2 += r.rel_l2;
    out.mean.rel_l1 += r.rel_l1;
    out.mean.max_err += r.max_err;
    out.reports.push_back(r);
  }
  const double n = static_cast<double>(references.size());
  out.mean.rel_l2 /= n;
  out.mean.rel_l1 /= n;
  out.mean.max_err /= n;
  out.mean.case_id = case_name(cfg.case_id);
  if (!references.empty()) out.mean.grid = grid_descriptor(references[0].grid);
  return out;
}

}  // namespace oplearn
