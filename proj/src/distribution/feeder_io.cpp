#include "tdcosim/distribution/feeder_io.hpp"

#include <iomanip>

#include "tdcosim/core/errors.hpp"

namespace tdcosim::dist {

using nlohmann::json;

json feeder_to_json(const Feeder& feeder) {
  json nodes = json::array();
  for (const auto& n : feeder.nodes()) nodes.push_back({{"id", n.id}, {"kv", n.nominal_kv}});
  json branches = json::array();
  for (const auto& b : feeder.branches()) {
    branches.push_back({{"from", b.from}, {"to", b.to}, {"r_pu", b.r_pu}, {"x_pu", b.x_pu}});
  }
  json loads = json::array();
  for (const auto& [node, l] : feeder.loads()) {
    loads.push_back({{"node", node},
                     {"p0_pu", l.p0_pu},
                     {"q0_pu", l.q0_pu},
                     {"z_frac", l.z_frac},
                     {"i_frac", l.i_frac},
                     {"p_frac", l.p_frac}});
  }
  return {{"schema", kFeederSchema}, {"id", feeder.id()},         {"base_mva", feeder.base_mva()},
          {"head", feeder.head_id()}, {"nodes", nodes},           {"branches", branches},
          {"loads", loads},           {"der_nodes", feeder.der_nodes()}};
}

Feeder feeder_from_json(const json& j) {
  try {
    if (j.contains("schema") && j.at("schema") != kFeederSchema) {
      throw ConfigError("unsupported feeder schema " + j.at("schema").dump());
    }
    std::vector<FeederNode> nodes;
    for (const auto& n : j.at("nodes")) nodes.push_back({n.at("id").get<std::string>(), n.value("kv", 12.47)});
    std::vector<FeederBranch> branches;
    for (const auto& b : j.at("branches")) {
      branches.push_back({b.at("from").get<std::string>(), b.at("to").get<std::string>(), b.at("r_pu").get<double>(),
                          b.at("x_pu").get<double>()});
    }
    std::map<std::string, ZipLoad> loads;
    for (const auto& l : j.value("loads", json::array())) {
      ZipLoad z{l.at("p0_pu").get<double>(), l.at("q0_pu").get<double>(), l.value("z_frac", 0.0),
                l.value("i_frac", 0.0), l.value("p_frac", 1.0)};
      if (!loads.emplace(l.at("node").get<std::string>(), z).second) {
        throw ConfigError("duplicate load at node " + l.at("node").dump());
      }
    }
    auto der_nodes = j.value("der_nodes", std::vector<std::string>{});
    return Feeder(std::move(nodes), std::move(branches), std::move(loads), std::move(der_nodes),
                  j.at("base_mva").get<double>(), j.value("head", std::string{}), j.value("id", std::string("feeder")));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid feeder JSON: ") + e.what());
  }
}

void write_voltage_csv(std::ostream& out, const Feeder& feeder, const PfSolution& solution) {
  out << "node,v_mag_pu,v_angle_rad,depth\n" << std::setprecision(12);
  for (const auto i : feeder.order()) {
    out << feeder.nodes()[i].id << ',' << std::abs(solution.node_v[i]) << ',' << std::arg(solution.node_v[i]) << ','
        << feeder.depth(i) << '\n';
  }
}

}  // namespace tdcosim::dist
