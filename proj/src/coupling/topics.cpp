#include "tdcosim/coupling/topics.hpp"

#include <algorithm>

#include "tdcosim/core/errors.hpp"

namespace tdcosim::coupling {

namespace {

void check_id(const std::string& value, const char* what) {
  if (value.empty()) throw ConfigError(std::string(what) + " must not be empty");
  if (value.find_first_of("/+#") != std::string::npos) {
    throw ConfigError(std::string(what) + " '" + value + "' contains a reserved topic character");
  }
}

}  // namespace

TopicMap::TopicMap(std::string run_id, std::string poi_id, std::string feeder_id)
    : run_id_(std::move(run_id)), poi_id_(std::move(poi_id)), feeder_id_(std::move(feeder_id)) {
  check_id(run_id_, "run id");
  check_id(poi_id_, "poi id");
  check_id(feeder_id_, "feeder id");
}

std::string TopicMap::measurement_topic() const { return "cosim/" + run_id_ + "/tx/" + poi_id_ + "/measurement"; }
std::string TopicMap::load_topic() const { return "cosim/" + run_id_ + "/feeder/" + feeder_id_ + "/load"; }
std::string TopicMap::control_topic() const { return "cosim/" + run_id_ + "/control"; }

bool topic_matches(std::string_view filter, std::string_view topic) {
  std::size_t fi = 0;
  std::size_t ti = 0;
  while (true) {
    const std::size_t fe = std::min(filter.find('/', fi), filter.size());
    const std::string_view flevel = filter.substr(fi, fe - fi);
    if (flevel == "#") return true;
    if (ti > topic.size()) return false;
    const std::size_t te = std::min(topic.find('/', ti), topic.size());
    const std::string_view tlevel = topic.substr(ti, te - ti);
    if (flevel != "+" && flevel != tlevel) return false;
    const bool f_done = fe == filter.size();
    const bool t_done = te == topic.size();
    if (f_done || t_done) {
      if (f_done && t_done) return true;
      // "a/#" also matches "a".
      return t_done && filter.substr(fe) == "/#";
    }
    fi = fe + 1;
    ti = te + 1;
  }
}

bool is_valid_topic_name(std::string_view topic) {
  return !topic.empty() && topic.size() <= 65535 && topic.find_first_of("+#") == std::string_view::npos &&
         topic.find('\0') == std::string_view::npos;
}

}  // namespace tdcosim::coupling
