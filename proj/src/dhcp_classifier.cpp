#include "iotsense/dhcp_classifier.hpp"

#include <algorithm>
#include <cctype>
#include <functional>

#include "iotsense/error.hpp"

namespace iotsense {

namespace {

void add_text_tokens(const std::string& text, std::string_view delimiters, LabelSet& out) {
  std::string token;
  auto flush = [&] {
    bool numeric = !token.empty() && std::all_of(token.begin(), token.end(), [](unsigned char c) {
      return std::isdigit(c) != 0;
    });
    if (!token.empty() && !numeric) out.insert(token);
    token.clear();
  };
  for (char ch : text) {
    if (delimiters.find(ch) != std::string_view::npos) {
      flush();
    } else {
      token += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    }
  }
  flush();
}

}  // namespace

LabelSet tokenize_dhcp(const DhcpFields& fields, std::string_view delimiters) {
  LabelSet labels;
  if (fields.hostname) add_text_tokens(*fields.hostname, delimiters, labels);
  if (fields.vci) add_text_tokens(*fields.vci, delimiters, labels);
  if (fields.prl) {
    for (auto code : *fields.prl) labels.insert("prl:" + std::to_string(code));
  }
  for (auto m : fields.message_types) labels.insert("msg:" + std::to_string(m));
  if (fields.max_size) labels.insert("maxsz:" + std::to_string(*fields.max_size));
  return labels;
}

std::optional<LabelSet> device_dhcp_labels(std::span<const PacketRecord> records,
                                           std::optional<Timestamp> until) {
  std::optional<LabelSet> labels;
  for (const auto& r : records) {
    if (!r.dhcp || r.direction != Direction::Outgoing) continue;
    if (until && !(r.timestamp < *until)) continue;
    DhcpFields f{r.dhcp->hostname, r.dhcp->vci, r.dhcp->prl, r.dhcp->max_size, {}};
    if (r.dhcp->message_type) f.message_types.push_back(*r.dhcp->message_type);
    auto tokens = tokenize_dhcp(f);
    if (!labels) labels.emplace();
    labels->insert(tokens.begin(), tokens.end());
  }
  return labels;
}

std::vector<std::string> build_vocabulary(std::span<const LabelSet> sets) {
  LabelSet all;
  for (const auto& s : sets) all.insert(s.begin(), s.end());
  return {all.begin(), all.end()};
}

BitVector encode_onehot(const LabelSet& labels, std::span<const std::string> vocabulary) {
  BitVector bits(vocabulary.size(), 0);
  for (std::size_t i = 0; i < vocabulary.size(); ++i) bits[i] = labels.count(vocabulary[i]) ? 1 : 0;
  return bits;
}

LabelSet decode_onehot(const BitVector& bits, std::span<const std::string> vocabulary) {
  LabelSet labels;
  for (std::size_t i = 0; i < bits.size() && i < vocabulary.size(); ++i) {
    if (bits[i]) labels.insert(vocabulary[i]);
  }
  return labels;
}

double gini_impurity(std::size_t n_not, std::size_t n_iot) {
  const double n = static_cast<double>(n_not + n_iot);
  if (n == 0) return 0.0;
  const double p = static_cast<double>(n_iot) / n;
  const double q = static_cast<double>(n_not) / n;
  return 1.0 - (p * p + q * q);
}

int DhcpSignatureModel::depth() const {
  if (nodes.empty()) return 0;
  std::function<int(std::size_t)> walk = [&](std::size_t i) -> int {
    const auto& n = nodes[i];
    if (n.is_leaf()) return 0;
    return 1 + std::max(walk(n.left), walk(n.right));
  };
  return walk(0);
}

void DhcpSignatureModel::validate() const {
  if (nodes.empty()) throw Error(ErrorKind::ModelFormat, "DHCP tree has no nodes");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    if (n.is_leaf()) continue;
    if (*n.label >= vocabulary.size())
      throw Error(ErrorKind::ModelFormat, "node label index out of vocabulary");
    // Children always follow their parent, which also rules out cycles.
    if (n.left <= i || n.right <= i || n.left >= nodes.size() || n.right >= nodes.size())
      throw Error(ErrorKind::ModelFormat, "bad child index in DHCP tree");
  }
  if (depth() > max_depth) throw Error(ErrorKind::ModelFormat, "DHCP tree exceeds max_depth");
}

DhcpSignatureModel train_tree(const std::vector<BitVector>& x, std::span<const DeviceClass> y,
                              std::vector<std::string> vocabulary, const TreeOptions& opts) {
  if (x.size() != y.size()) throw std::invalid_argument("train_tree: x and y sizes differ");
  bool pos = std::find(y.begin(), y.end(), DeviceClass::IoT) != y.end();
  bool neg = std::find(y.begin(), y.end(), DeviceClass::NoT) != y.end();
  if (!pos || !neg) throw Error(ErrorKind::SingleClass, "DHCP training labels hold a single class");
  for (const auto& row : x) {
    if (row.size() != vocabulary.size())
      throw std::invalid_argument("train_tree: bit vector length differs from vocabulary");
  }

  DhcpSignatureModel model;
  model.vocabulary = std::move(vocabulary);
  model.max_depth = opts.max_depth;
  const std::size_t n_features = model.vocabulary.size();

  std::function<std::size_t(const std::vector<std::size_t>&, int)> build =
      [&](const std::vector<std::size_t>& rows, int depth) -> std::size_t {
    TreeNode node;
    for (auto r : rows) (y[r] == DeviceClass::IoT ? node.n_iot : node.n_not) += 1;
    node.leaf = node.n_iot >= node.n_not ? DeviceClass::IoT : DeviceClass::NoT;
    const std::size_t id = model.nodes.size();
    model.nodes.push_back(node);
    if (node.n_iot == 0 || node.n_not == 0 || depth >= opts.max_depth) return id;

    const double parent = gini_impurity(node.n_not, node.n_iot);
    const double total = static_cast<double>(rows.size());
    std::optional<std::size_t> best;
    double best_gini = parent;
    for (std::size_t j = 0; j < n_features; ++j) {
      std::size_t l_not = 0, l_iot = 0, r_not = 0, r_iot = 0;
      for (auto r : rows) {
        bool present = x[r][j] != 0;
        bool iot = y[r] == DeviceClass::IoT;
        (present ? (iot ? r_iot : r_not) : (iot ? l_iot : l_not)) += 1;
      }
      std::size_t nl = l_not + l_iot, nr = r_not + r_iot;
      if (nl < opts.min_leaf || nr < opts.min_leaf || nl == 0 || nr == 0) continue;
      double g = (static_cast<double>(nl) * gini_impurity(l_not, l_iot) +
                  static_cast<double>(nr) * gini_impurity(r_not, r_iot)) /
                 total;
      if (g < best_gini - 1e-12) {
        best_gini = g;
        best = j;
      }
    }
    if (!best) return id;

    std::vector<std::size_t> left, right;
    for (auto r : rows) (x[r][*best] ? right : left).push_back(r);
    std::size_t l = build(left, depth + 1);
    std::size_t rgt = build(right, depth + 1);
    model.nodes[id].label = *best;
    model.nodes[id].left = l;
    model.nodes[id].right = rgt;
    return id;
  };

  std::vector<std::size_t> all(x.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  build(all, 0);
  return model;
}

DhcpSignatureModel train_dhcp_classifier(std::span<const LabelSet> sets,
                                         std::span<const DeviceClass> y, const TreeOptions& opts) {
  auto vocab = build_vocabulary(sets);
  std::vector<BitVector> x;
  x.reserve(sets.size());
  for (const auto& s : sets) x.push_back(encode_onehot(s, vocab));
  return train_tree(x, y, std::move(vocab), opts);
}

DeviceClass predict_tree(const DhcpSignatureModel& model, const BitVector& bits) {
  std::size_t i = 0;
  while (!model.nodes[i].is_leaf()) {
    const auto& n = model.nodes[i];
    bool present = *n.label < bits.size() && bits[*n.label] != 0;
    i = present ? n.right : n.left;
  }
  return model.nodes[i].leaf;
}

DeviceClass predict_tree(const DhcpSignatureModel& model, const LabelSet& labels) {
  return predict_tree(model, encode_onehot(labels, model.vocabulary));
}

Verdict predict_device(const DhcpSignatureModel& model, const std::optional<LabelSet>& labels) {
  if (!labels) return Verdict::Abstain;
  return to_verdict(predict_tree(model, *labels));
}

nlohmann::ordered_json to_json(const DhcpSignatureModel& model) {
  nlohmann::ordered_json j;
  j["kind"] = "dhcp_tree";
  j["version"] = 1;
  j["vocabulary"] = model.vocabulary;
  auto nodes = nlohmann::ordered_json::array();
  for (const auto& n : model.nodes) {
    if (n.is_leaf()) {
      nodes.push_back({{"leaf", to_string(n.leaf)}, {"counts", {n.n_not, n.n_iot}}});
    } else {
      nodes.push_back({{"label", *n.label}, {"left", n.left}, {"right", n.right}});
    }
  }
  j["nodes"] = nodes;
  j["max_depth"] = model.max_depth;
  return j;
}

DhcpSignatureModel dhcp_model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("kind") != "dhcp_tree") throw Error(ErrorKind::ModelFormat, "not a DHCP tree model");
    if (j.at("version") != 1) throw Error(ErrorKind::ModelFormat, "unsupported model version");
    DhcpSignatureModel m;
    m.vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
    m.max_depth = j.at("max_depth").get<int>();
    for (const auto& jn : j.at("nodes")) {
      TreeNode n;
      if (jn.contains("leaf")) {
        auto c = parse_device_class(jn.at("leaf").get<std::string>());
        if (!c) throw Error(ErrorKind::ModelFormat, "bad leaf verdict");
        n.leaf = *c;
        auto counts = jn.at("counts").get<std::vector<std::size_t>>();
        if (counts.size() != 2) throw Error(ErrorKind::ModelFormat, "leaf counts must have 2 entries");
        n.n_not = counts[0];
        n.n_iot = counts[1];
      } else {
        n.label = jn.at("label").get<std::size_t>();
        n.left = jn.at("left").get<std::size_t>();
        n.right = jn.at("right").get<std::size_t>();
      }
      m.nodes.push_back(n);
    }
    m.validate();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ModelFormat, e.what());
  }
}

}  // namespace iotsense
