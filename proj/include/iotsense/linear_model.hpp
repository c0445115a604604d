#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"

#include "iotsense/features.hpp"
#include "iotsense/manifest.hpp"
#include "iotsense/matrix.hpp"

namespace iotsense {

struct LabeledSlot {
  SlotFeatureVector features;
  DeviceClass label = DeviceClass::IoT;

  const std::string& device_key() const { return features.device_key; }
};

/// +1 for IoT (the positive class), -1 for NoT.
inline int class_sign(DeviceClass c) { return c == DeviceClass::IoT ? 1 : -1; }

/// Per-feature mean of the non-missing training values, pooled over both
/// classes. Throws Error{AllMissing} naming the first feature with no value.
std::vector<double> fit_defaults(std::span<const LabeledSlot> train,
                                 std::span<const FeatureId> features);

/// Feature matrix in `features` order with missing cells replaced by
/// `defaults`.
Matrix impute(std::span<const LabeledSlot> slots, std::span<const FeatureId> features,
              std::span<const double> defaults);

struct Scaler {
  std::vector<double> mu;
  std::vector<double> sigma;  // population std, zero clamped to 1
};

Scaler fit_scaler(const Matrix& x);
void standardize(Matrix& x, const Scaler& scaler);

struct LogRegOptions {
  double lambda = 1.0;
  int max_iter = 10000;
  double tol = 1e-6;
  std::uint64_t seed = 0;
  bool record_loss = false;
};

struct LogRegResult {
  std::vector<double> theta;  // theta[0] is the intercept
  int iterations = 0;
  bool converged = false;
  std::vector<double> loss_history;  // filled when record_loss is set
};

/// (1/n) sum log(1 + exp(-y (theta0 + w.x))) + (lambda / 2n) |w|^2
double logistic_loss(const Matrix& x, std::span<const int> y, std::span<const double> theta,
                     double lambda);
std::vector<double> logistic_gradient(const Matrix& x, std::span<const int> y,
                                      std::span<const double> theta, double lambda);

/// Full-batch gradient descent from theta = 0 with a fixed 1/L step, where L
/// bounds the Lipschitz constant of the gradient. Stops when the gradient's
/// infinity norm drops below `tol` or after `max_iter` steps.
/// Throws Error{SingleClass}.
LogRegResult train_logreg(const Matrix& x, std::span<const int> y, const LogRegOptions& opts = {});

struct TrainingMeta {
  std::uint64_t seed = 0;
  std::size_t n_train_slots = 0;
  double lambda = 1.0;
};

struct LinearModel {
  std::vector<FeatureId> features;
  std::vector<double> theta;
  std::vector<double> mu;
  std::vector<double> sigma;
  std::vector<double> defaults;
  std::int64_t slot_width = 0;
  TrainingMeta meta;

  /// Throws Error{ModelFormat} when vector lengths disagree or a sigma is not
  /// positive.
  void validate() const;
};

struct Prediction {
  DeviceClass verdict = DeviceClass::NoT;
  double score = 0.0;
};

/// Imputes, standardizes and scores `x`; IoT iff the score is positive.
/// Throws Error{WidthMismatch} when the slot width differs from the model's.
Prediction predict(const LinearModel& model, const SlotFeatureVector& x);

/// Same rule on raw values given in the model's feature order.
Prediction predict_values(const LinearModel& model, std::span<const std::optional<double>> x);

/// Caps each device at `max_per_device` slots, taken evenly from the low,
/// medium and high bandwidth tertiles of that device (missing bandwidth
/// counts as 0). Within a tertile slots are ordered by start time and picked
/// at evenly spaced positions. Output keeps device order of first appearance.
std::vector<LabeledSlot> balance_per_device(std::span<const LabeledSlot> slots,
                                            std::size_t max_per_device = 100);

struct LinearTrainOptions {
  LogRegOptions logreg;
  std::size_t max_per_device = 100;
};

/// balance -> defaults -> impute -> scaler -> logistic regression.
LinearModel train_linear_model(std::span<const LabeledSlot> slots,
                               std::span<const FeatureId> features, std::int64_t slot_width,
                               const LinearTrainOptions& opts = {});

nlohmann::ordered_json to_json(const LinearModel& model);
/// Throws Error{ModelFormat} or Error{UnknownFeature}.
LinearModel linear_model_from_json(const nlohmann::json& j);

}  // namespace iotsense
