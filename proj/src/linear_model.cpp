#include "iotsense/linear_model.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "iotsense/error.hpp"

namespace iotsense {

namespace {

// log(1 + exp(-m)) without overflow.
double log1p_exp_neg(double m) {
  return m > 0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
}

// 1 / (1 + exp(m))
double sigmoid_neg(double m) {
  if (m >= 0) {
    double e = std::exp(-m);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(m));
}

double margin(const Matrix& x, std::size_t row, std::span<const double> theta) {
  double z = theta[0];
  auto r = x.row(row);
  for (std::size_t j = 0; j < r.size(); ++j) z += theta[j + 1] * r[j];
  return z;
}

void check_shapes(const Matrix& x, std::span<const int> y, std::span<const double> theta) {
  if (x.rows() != y.size() || theta.size() != x.cols() + 1)
    throw std::invalid_argument("logistic regression: inconsistent shapes");
}

}  // namespace

std::vector<double> fit_defaults(std::span<const LabeledSlot> train,
                                 std::span<const FeatureId> features) {
  std::vector<double> defaults;
  defaults.reserve(features.size());
  for (FeatureId f : features) {
    double sum = 0;
    std::size_t n = 0;
    for (const auto& s : train) {
      if (auto v = s.features[f]) {
        sum += *v;
        ++n;
      }
    }
    if (n == 0) throw Error(ErrorKind::AllMissing, std::string(feature_name(f)));
    defaults.push_back(sum / static_cast<double>(n));
  }
  return defaults;
}

Matrix impute(std::span<const LabeledSlot> slots, std::span<const FeatureId> features,
              std::span<const double> defaults) {
  Matrix x(slots.size(), features.size());
  for (std::size_t i = 0; i < slots.size(); ++i) {
    for (std::size_t j = 0; j < features.size(); ++j)
      x(i, j) = slots[i].features[features[j]].value_or(defaults[j]);
  }
  return x;
}

Scaler fit_scaler(const Matrix& x) {
  Scaler s;
  const double n = static_cast<double>(x.rows());
  for (std::size_t j = 0; j < x.cols(); ++j) {
    double mean = 0;
    for (std::size_t i = 0; i < x.rows(); ++i) mean += x(i, j);
    mean /= n;
    double var = 0;
    for (std::size_t i = 0; i < x.rows(); ++i) var += (x(i, j) - mean) * (x(i, j) - mean);
    double sd = std::sqrt(var / n);
    s.mu.push_back(mean);
    s.sigma.push_back(sd > 0 ? sd : 1.0);
  }
  return s;
}

void standardize(Matrix& x, const Scaler& scaler) {
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) x(i, j) = (x(i, j) - scaler.mu[j]) / scaler.sigma[j];
  }
}

double logistic_loss(const Matrix& x, std::span<const int> y, std::span<const double> theta,
                     double lambda) {
  check_shapes(x, y, theta);
  const double n = static_cast<double>(x.rows());
  double loss = 0;
  for (std::size_t i = 0; i < x.rows(); ++i) loss += log1p_exp_neg(y[i] * margin(x, i, theta));
  double penalty = 0;
  for (std::size_t j = 1; j < theta.size(); ++j) penalty += theta[j] * theta[j];
  return loss / n + lambda / (2 * n) * penalty;
}

std::vector<double> logistic_gradient(const Matrix& x, std::span<const int> y,
                                      std::span<const double> theta, double lambda) {
  check_shapes(x, y, theta);
  const double n = static_cast<double>(x.rows());
  std::vector<double> g(theta.size(), 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double coef = -y[i] * sigmoid_neg(y[i] * margin(x, i, theta));
    g[0] += coef;
    auto r = x.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) g[j + 1] += coef * r[j];
  }
  for (std::size_t j = 0; j < g.size(); ++j) {
    g[j] /= n;
    if (j > 0) g[j] += lambda / n * theta[j];
  }
  return g;
}

LogRegResult train_logreg(const Matrix& x, std::span<const int> y, const LogRegOptions& opts) {
  if (x.rows() != y.size() || x.rows() < 2)
    throw std::invalid_argument("train_logreg: need at least two labeled rows");
  bool pos = std::any_of(y.begin(), y.end(), [](int v) { return v > 0; });
  bool neg = std::any_of(y.begin(), y.end(), [](int v) { return v < 0; });
  if (!pos || !neg) throw Error(ErrorKind::SingleClass, "training labels hold a single class");

  // The Hessian is bounded by (1/4n) X~'X~ + (lambda/n) I, and the squared
  // Frobenius norm bounds the top eigenvalue of X~'X~.
  const double n = static_cast<double>(x.rows());
  double frob = 0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    frob += 1.0;
    for (double v : x.row(i)) frob += v * v;
  }
  const double lipschitz = frob / (4 * n) + opts.lambda / n;
  const double step = 1.0 / lipschitz;

  LogRegResult res;
  res.theta.assign(x.cols() + 1, 0.0);
  for (int it = 0; it < opts.max_iter; ++it) {
    if (opts.record_loss) res.loss_history.push_back(logistic_loss(x, y, res.theta, opts.lambda));
    auto g = logistic_gradient(x, y, res.theta, opts.lambda);
    double gmax = 0;
    for (double v : g) gmax = std::max(gmax, std::fabs(v));
    if (gmax < opts.tol) {
      res.converged = true;
      break;
    }
    for (std::size_t j = 0; j < g.size(); ++j) res.theta[j] -= step * g[j];
    res.iterations = it + 1;
  }
  if (opts.record_loss && !res.converged)
    res.loss_history.push_back(logistic_loss(x, y, res.theta, opts.lambda));
  return res;
}

void LinearModel::validate() const {
  const std::size_t d = features.size();
  if (theta.size() != d + 1 || mu.size() != d || sigma.size() != d || defaults.size() != d)
    throw Error(ErrorKind::ModelFormat, "linear model vector lengths disagree");
  for (double s : sigma) {
    if (!(s > 0)) throw Error(ErrorKind::ModelFormat, "linear model sigma must be positive");
  }
  if (slot_width <= 0) throw Error(ErrorKind::ModelFormat, "slot_width must be positive");
}

Prediction predict_values(const LinearModel& model, std::span<const std::optional<double>> x) {
  if (x.size() != model.features.size())
    throw std::invalid_argument("predict_values: expected one value per model feature");
  double score = model.theta[0];
  for (std::size_t i = 0; i < x.size(); ++i) {
    double v = x[i].value_or(model.defaults[i]);
    score += model.theta[i + 1] * ((v - model.mu[i]) / model.sigma[i]);
  }
  return {score > 0 ? DeviceClass::IoT : DeviceClass::NoT, score};
}

Prediction predict(const LinearModel& model, const SlotFeatureVector& x) {
  if (x.width_seconds != model.slot_width)
    throw Error(ErrorKind::WidthMismatch, "slot width " + std::to_string(x.width_seconds) +
                                              " s does not match model width " +
                                              std::to_string(model.slot_width) + " s");
  std::vector<std::optional<double>> values;
  values.reserve(model.features.size());
  for (FeatureId f : model.features) values.push_back(x[f]);
  return predict_values(model, values);
}

std::vector<LabeledSlot> balance_per_device(std::span<const LabeledSlot> slots,
                                            std::size_t max_per_device) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<const LabeledSlot*>> by_device;
  for (const auto& s : slots) {
    auto [it, inserted] = by_device.try_emplace(s.device_key());
    if (inserted) order.push_back(s.device_key());
    it->second.push_back(&s);
  }

  std::vector<LabeledSlot> out;
  for (const auto& dev : order) {
    auto& rows = by_device[dev];
    if (rows.size() <= max_per_device) {
      for (auto* r : rows) out.push_back(*r);
      continue;
    }
    std::stable_sort(rows.begin(), rows.end(), [](const LabeledSlot* a, const LabeledSlot* b) {
      double ba = a->features[FeatureId::bandwidth_bytes].value_or(0);
      double bb = b->features[FeatureId::bandwidth_bytes].value_or(0);
      if (ba != bb) return ba < bb;
      return a->features.slot_start < b->features.slot_start;
    });
    const std::size_t n = rows.size();
    std::size_t offset = 0;
    for (std::size_t t = 0; t < 3; ++t) {
      std::size_t size = n / 3 + (t < n % 3 ? 1 : 0);
      std::size_t quota = max_per_device / 3 + (t < max_per_device % 3 ? 1 : 0);
      std::vector<const LabeledSlot*> tertile(rows.begin() + offset, rows.begin() + offset + size);
      offset += size;
      std::stable_sort(tertile.begin(), tertile.end(),
                       [](const LabeledSlot* a, const LabeledSlot* b) {
                         return a->features.slot_start < b->features.slot_start;
                       });
      for (std::size_t k = 0; k < quota; ++k) out.push_back(*tertile[k * size / quota]);
    }
  }
  return out;
}

LinearModel train_linear_model(std::span<const LabeledSlot> slots,
                               std::span<const FeatureId> features, std::int64_t slot_width,
                               const LinearTrainOptions& opts) {
  auto train = balance_per_device(slots, opts.max_per_device);
  LinearModel model;
  model.features.assign(features.begin(), features.end());
  model.slot_width = slot_width;
  model.defaults = fit_defaults(train, features);
  Matrix x = impute(train, features, model.defaults);
  Scaler scaler = fit_scaler(x);
  standardize(x, scaler);
  std::vector<int> y;
  y.reserve(train.size());
  for (const auto& s : train) y.push_back(class_sign(s.label));
  model.theta = train_logreg(x, y, opts.logreg).theta;
  model.mu = std::move(scaler.mu);
  model.sigma = std::move(scaler.sigma);
  model.meta = {opts.logreg.seed, train.size(), opts.logreg.lambda};
  return model;
}

nlohmann::ordered_json to_json(const LinearModel& model) {
  nlohmann::ordered_json j;
  j["kind"] = "linear";
  j["version"] = 1;
  j["slot_width"] = model.slot_width;
  auto names = nlohmann::ordered_json::array();
  for (FeatureId f : model.features) names.push_back(feature_name(f));
  j["features"] = names;
  j["theta"] = model.theta;
  j["mu"] = model.mu;
  j["sigma"] = model.sigma;
  j["defaults"] = model.defaults;
  j["meta"] = {{"seed", model.meta.seed},
               {"n_train_slots", model.meta.n_train_slots},
               {"lambda", model.meta.lambda}};
  return j;
}

LinearModel linear_model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("kind") != "linear") throw Error(ErrorKind::ModelFormat, "not a linear model");
    if (j.at("version") != 1) throw Error(ErrorKind::ModelFormat, "unsupported model version");
    LinearModel m;
    m.slot_width = j.at("slot_width").get<std::int64_t>();
    for (const auto& name : j.at("features")) {
      auto id = parse_feature(name.get<std::string>());
      if (!id) throw Error(ErrorKind::UnknownFeature, name.get<std::string>());
      m.features.push_back(*id);
    }
    m.theta = j.at("theta").get<std::vector<double>>();
    m.mu = j.at("mu").get<std::vector<double>>();
    m.sigma = j.at("sigma").get<std::vector<double>>();
    m.defaults = j.at("defaults").get<std::vector<double>>();
    if (j.contains("meta")) {
      const auto& meta = j["meta"];
      m.meta.seed = meta.value("seed", std::uint64_t{0});
      m.meta.n_train_slots = meta.value("n_train_slots", std::size_t{0});
      m.meta.lambda = meta.value("lambda", 1.0);
    }
    m.validate();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ModelFormat, e.what());
  }
}

}  // namespace iotsense
