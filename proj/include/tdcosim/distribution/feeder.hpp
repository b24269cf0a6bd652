#pragma once

#include <complex>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace tdcosim::dist {

/// Composite load: fractions of constant impedance, current and power.
struct ZipLoad {
  double p0_pu = 0.0;
  double q0_pu = 0.0;
  double z_frac = 0.0;
  double i_frac = 0.0;
  double p_frac = 1.0;

  static ZipLoad constant_power(double p, double q) { return {p, q, 0.0, 0.0, 1.0}; }

  void validate() const;
  /// Consumed complex power at voltage magnitude `v_pu`.
  std::complex<double> power_at(double v_pu) const {
    return std::complex<double>(p0_pu, q0_pu) * (z_frac * v_pu * v_pu + i_frac * v_pu + p_frac);
  }

  friend bool operator==(const ZipLoad&, const ZipLoad&) = default;
};

struct FeederNode {
  std::string id;
  double nominal_kv = 12.47;

  friend bool operator==(const FeederNode&, const FeederNode&) = default;
};

struct FeederBranch {
  std::string from;
  std::string to;
  double r_pu = 0.0;
  double x_pu = 0.0;

  friend bool operator==(const FeederBranch&, const FeederBranch&) = default;
};

/// Radial feeder. Immutable after construction; the constructor validates
/// that the branches form a spanning tree rooted at the head node and caches
/// a breadth-first ordering for the sweep.
class Feeder {
 public:
  Feeder(std::vector<FeederNode> nodes, std::vector<FeederBranch> branches, std::map<std::string, ZipLoad> loads,
         std::vector<std::string> der_nodes, double base_mva, std::string head_id = {}, std::string id = "feeder");

  const std::string& id() const { return id_; }
  const std::vector<FeederNode>& nodes() const { return nodes_; }
  const std::vector<FeederBranch>& branches() const { return branches_; }
  const std::map<std::string, ZipLoad>& loads() const { return loads_; }
  const std::vector<std::string>& der_nodes() const { return der_nodes_; }
  double base_mva() const { return base_mva_; }

  std::size_t size() const { return nodes_.size(); }
  std::size_t head() const { return head_; }
  const std::string& head_id() const { return nodes_[head_].id; }
  std::size_t index_of(const std::string& node_id) const;
  bool has_node(const std::string& node_id) const;

  /// Breadth-first order from the head; parents precede children.
  const std::vector<std::size_t>& order() const { return order_; }
  /// Parent of node i (head maps to itself).
  std::size_t parent(std::size_t i) const { return parent_[i]; }
  /// Impedance of the branch connecting i to parent(i); zero for head.
  std::complex<double> branch_z(std::size_t i) const { return branch_z_[i]; }
  std::size_t depth(std::size_t i) const { return depth_[i]; }
  std::size_t max_depth() const;
  /// Load per node index (zero load where none is defined).
  const std::vector<ZipLoad>& load_by_index() const { return load_by_index_; }

  friend bool operator==(const Feeder& a, const Feeder& b) {
    return a.id_ == b.id_ && a.nodes_ == b.nodes_ && a.branches_ == b.branches_ && a.loads_ == b.loads_ &&
           a.der_nodes_ == b.der_nodes_ && a.base_mva_ == b.base_mva_ && a.head_ == b.head_;
  }

 private:
  std::string id_;
  std::vector<FeederNode> nodes_;
  std::vector<FeederBranch> branches_;
  std::map<std::string, ZipLoad> loads_;
  std::vector<std::string> der_nodes_;
  double base_mva_;
  std::size_t head_ = 0;
  std::map<std::string, std::size_t> index_;
  std::vector<std::size_t> order_;
  std::vector<std::size_t> parent_;
  std::vector<std::complex<double>> branch_z_;
  std::vector<std::size_t> depth_;
  std::vector<ZipLoad> load_by_index_;
};

}  // namespace tdcosim::dist
