#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "iotsense/manifest.hpp"
#include "iotsense/packet.hpp"
#include "iotsense/verdict.hpp"

namespace iotsense {

using LabelSet = std::set<std::string>;

inline constexpr std::string_view kDefaultDelimiters = " \t,./\\_-+|{}[]()=:";

struct DhcpFields {
  std::optional<std::string> hostname;
  std::optional<std::string> vci;
  std::optional<std::vector<std::uint8_t>> prl;
  std::optional<std::uint32_t> max_size;
  std::vector<std::uint32_t> message_types;
};

/// Hostname and vci are lowercased and split on `delimiters`; pure-digit
/// fragments are dropped. PRL codes, message types and the max size become
/// namespaced labels ("prl:12", "msg:1", "maxsz:1500").
LabelSet tokenize_dhcp(const DhcpFields& fields, std::string_view delimiters = kDefaultDelimiters);

/// Union of labels over the device's own (Outgoing) DHCP packets with
/// timestamp strictly before `until`, or all of them. Returns nullopt when
/// the device sent no DHCP.
std::optional<LabelSet> device_dhcp_labels(std::span<const PacketRecord> records,
                                           std::optional<Timestamp> until = std::nullopt);

/// Sorted union of all labels.
std::vector<std::string> build_vocabulary(std::span<const LabelSet> sets);

using BitVector = std::vector<std::uint8_t>;

BitVector encode_onehot(const LabelSet& labels, std::span<const std::string> vocabulary);
LabelSet decode_onehot(const BitVector& bits, std::span<const std::string> vocabulary);

double gini_impurity(std::size_t n_not, std::size_t n_iot);

struct TreeNode {
  // Internal node when `label` is set: left = label absent, right = present.
  std::optional<std::size_t> label;
  std::size_t left = 0;
  std::size_t right = 0;
  DeviceClass leaf = DeviceClass::IoT;
  std::size_t n_not = 0;
  std::size_t n_iot = 0;

  bool is_leaf() const { return !label; }
};

struct DhcpSignatureModel {
  std::vector<std::string> vocabulary;
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  int max_depth = 5;

  int depth() const;
  /// Throws Error{ModelFormat}.
  void validate() const;
};

struct TreeOptions {
  int max_depth = 5;
  std::size_t min_leaf = 1;
};

/// CART on binary features with Gini impurity. Ties between splits go to the
/// lowest vocabulary index; leaf ties go to IoT. Throws Error{SingleClass}.
DhcpSignatureModel train_tree(const std::vector<BitVector>& x, std::span<const DeviceClass> y,
                              std::vector<std::string> vocabulary, const TreeOptions& opts = {});

/// Convenience: vocabulary from the label sets, then train_tree.
DhcpSignatureModel train_dhcp_classifier(std::span<const LabelSet> sets,
                                         std::span<const DeviceClass> y,
                                         const TreeOptions& opts = {});

DeviceClass predict_tree(const DhcpSignatureModel& model, const BitVector& bits);
DeviceClass predict_tree(const DhcpSignatureModel& model, const LabelSet& labels);
/// Abstain when the device has no DHCP evidence.
Verdict predict_device(const DhcpSignatureModel& model, const std::optional<LabelSet>& labels);

nlohmann::ordered_json to_json(const DhcpSignatureModel& model);
DhcpSignatureModel dhcp_model_from_json(const nlohmann::json& j);

}  // namespace iotsense
