#include "tdcosim/harness/runner.hpp"

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <thread>

#include <spdlog/spdlog.h>

#include "tdcosim/core/errors.hpp"
#include "tdcosim/coupling/endpoint.hpp"
#include "tdcosim/coupling/mqtt_transport.hpp"
#include "tdcosim/coupling/sequencer.hpp"
#include "tdcosim/coupling/wire.hpp"
#include "tdcosim/transmission/simulator.hpp"

namespace tdcosim::harness {

using nlohmann::json;
using namespace std::chrono_literals;

namespace {

std::string unique_run_id(const ScenarioSpec& spec) {
  static std::atomic<int> counter{0};
  return spec.run_id() + "-" + std::to_string(::getpid()) + "-" + std::to_string(++counter);
}

json config_echo(const ScenarioSpec& spec) { return scenario_to_json(spec); }

std::pair<std::string, std::uint16_t> broker_address(const TransportSpec& t) {
  auto env = coupling::MqttOptions::from_env("probe");
  return {t.host.empty() ? env.host : t.host, t.port == 0 ? env.port : t.port};
}

/// Child process running `dx-endpoint`; killed if still alive on scope exit.
class EndpointProcess {
 public:
  EndpointProcess(const std::string& exe, const json& config) {
    if (exe.empty()) throw ConfigError("process-mode distribution endpoint needs an executable path");
    path_ = (std::filesystem::temp_directory_path() /
             ("tdcosim-dx-" + config.at("run_id").get<std::string>() + ".json"))
                .string();
    std::ofstream(path_) << config.dump();
    std::fflush(nullptr);
    pid_ = ::fork();
    if (pid_ < 0) throw TransportError("fork failed");
    if (pid_ == 0) {
      ::execl(exe.c_str(), exe.c_str(), "dx-endpoint", "--config", path_.c_str(), static_cast<char*>(nullptr));
      std::_Exit(127);
    }
  }
  ~EndpointProcess() {
    if (pid_ > 0 && !reap(3s)) {
      ::kill(pid_, SIGKILL);
      ::waitpid(pid_, nullptr, 0);
    }
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
  bool reap(std::chrono::milliseconds timeout) {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    while (std::chrono::steady_clock::now() < deadline) {
      int status = 0;
      if (::waitpid(pid_, &status, WNOHANG) == pid_) {
        pid_ = -1;
        return true;
      }
      std::this_thread::sleep_for(10ms);
    }
    return false;
  }

 private:
  std::string path_;
  pid_t pid_ = -1;
};

/// Subscribes to the control topic at construction so a ready announcement
/// sent right after the child starts cannot be missed.
class ReadyLatch {
 public:
  ReadyLatch(coupling::Transport& transport, const coupling::TopicMap& topics) : transport_(transport) {
    sub_ = transport_.subscribe(topics.control_topic(), [this](const std::string&, const std::string& p) {
      try {
        if (coupling::decode_control(p).cmd != "ready") return;
      } catch (const TransportError&) {
        return;
      }
      std::lock_guard lock(m_);
      ready_ = true;
      cv_.notify_all();
    });
  }
  ~ReadyLatch() { transport_.unsubscribe(sub_); }

  void wait(std::chrono::milliseconds timeout) {
    std::unique_lock lock(m_);
    if (!cv_.wait_for(lock, timeout, [this] { return ready_; })) {
      throw TransportError("distribution endpoint process did not report ready");
    }
  }

 private:
  coupling::Transport& transport_;
  coupling::SubscriptionId sub_{};
  std::mutex m_;
  std::condition_variable cv_;
  bool ready_ = false;
};

}  // namespace

RunReport run_cosim(const ScenarioSpec& spec, const RunOptions& options) {
  spec.validate();
  const auto& cfg = spec.config;
  const auto model = spec.feeder_model();
  const std::string run_id = unique_run_id(spec);
  const coupling::TopicMap topics(run_id, spec.line.to_bus, model.feeder.id());

  coupling::DxModel settle_dx(model, spec.der_events, cfg);
  tx::TxSimulator sim(spec.network(), cfg.dt_tx);
  coupling::settle_initial_state(sim, settle_dx, spec.line.to_bus, cfg);

  std::shared_ptr<coupling::LoopbackBroker> loop;
  std::unique_ptr<coupling::Transport> tx_side;
  std::unique_ptr<coupling::Transport> dx_side;
  std::unique_ptr<EndpointProcess> process;
  std::unique_ptr<coupling::DistributionEndpoint> endpoint;

  if (spec.transport.kind == TransportSpec::Kind::Mqtt) {
    const auto [host, port] = broker_address(spec.transport);
    coupling::MqttOptions o;
    o.host = host;
    o.port = port;
    o.client_id = topics.tx_client_id();
    tx_side = std::make_unique<coupling::MqttTransport>(o);
    if (spec.transport.dx_process) {
      ReadyLatch latch(*tx_side, topics);
      process = std::make_unique<EndpointProcess>(options.dx_executable,
                                                  endpoint_process_config(spec, run_id, host, port));
      latch.wait(20s);
    } else {
      o.client_id = topics.dx_client_id();
      dx_side = std::make_unique<coupling::MqttTransport>(o);
    }
  } else {
    if (spec.transport.dx_process) throw ConfigError("a process-mode endpoint needs the mqtt transport");
    loop = coupling::LoopbackBroker::create(coupling::LoopbackBroker::Mode::Threaded);
    tx_side = loop->connect(topics.tx_client_id());
    dx_side = loop->connect(topics.dx_client_id());
  }
  if (options.duplicate_delivery) {
    tx_side = std::make_unique<coupling::DuplicatingTransport>(std::move(tx_side));
    if (dx_side) dx_side = std::make_unique<coupling::DuplicatingTransport>(std::move(dx_side));
  }
  if (dx_side) {
    endpoint = std::make_unique<coupling::DistributionEndpoint>(*dx_side, topics,
                                                                coupling::DxModel(model, spec.der_events, cfg));
    endpoint->start();
  }

  coupling::SequencerOptions so;
  so.poi_bus = spec.line.to_bus;
  so.stale_policy = spec.stale_policy;
  so.logical_reply_timeout = std::chrono::milliseconds(static_cast<std::int64_t>(spec.reply_timeout_s * 1000.0));
  const auto seq = coupling::sequencer_run(sim, *tx_side, topics, cfg, spec.duration_ticks(), so);

  RunReport r;
  r.mode = RunMode::Cosim;
  r.scenario = spec.name;
  r.dt_tx_s = cfg.dt_tx_seconds();
  r.dt_cosim_s = cfg.dt_cosim_seconds();
  r.config = config_echo(spec);
  r.complete = seq.complete;
  r.abort_reason = seq.abort_reason;
  const auto poi = sim.network().index_of(spec.line.to_bus);
  for (std::size_t n = 0; n < seq.states.size(); ++n) {
    r.t_s.push_back(seq.states[n].time.seconds());
    r.v_pcc.push_back(std::abs(seq.states[n].bus_voltages[poi]));
    r.freq.push_back(seq.states[n].freq_hz);
    r.p_dx.push_back(seq.p_mw[n]);
    r.q_dx.push_back(seq.q_mvar[n]);
  }
  for (const auto& d : model.ders) r.der_ids.push_back(d.id);
  r.der_events = spec.der_events;
  for (const auto& d : seq.delays) {
    r.delay_step.push_back(d.step_index);
    r.delay_s.push_back(d.delay_s());
  }
  r.overruns = seq.overruns;
  r.counters = {{"measurements", seq.measurements.size()},
                {"loads_applied", seq.applied.size()},
                {"duplicates_dropped", seq.duplicates_dropped},
                {"late_discarded", seq.late_discarded},
                {"decode_errors", seq.decode_errors},
                {"logical_timeouts", seq.logical_timeouts},
                {"nonconverged_replies", seq.nonconverged_replies},
                {"stale_steps", seq.stale_steps}};

  if (endpoint) {
    endpoint->wait();
    const auto rec = endpoint->record();
    r.der_outputs = rec.der_outputs;
    r.overruns.insert(r.overruns.end(), rec.overruns.begin(), rec.overruns.end());
    r.counters["dx_duplicates"] = rec.duplicates;
    r.counters["dx_regressions"] = rec.regressions;
  }
  if (process && !process->reap(5s)) spdlog::warn("distribution endpoint process did not exit after stop");
  if (loop) loop->shutdown();
  return r;
}

RunReport run_monolithic(const ScenarioSpec& spec, RunMode mode) {
  if (mode == RunMode::Cosim) throw ConfigError("run_monolithic needs a monolithic mode");
  spec.validate();
  const auto& cfg = spec.config;
  const auto model = spec.feeder_model();
  coupling::DxModel dx(model, spec.der_events, cfg);
  const auto program = spec.effective_reference();
  const Ticks dt = cfg.dt_tx;
  const auto ticks = spec.duration_ticks() / dt;

  RunReport r;
  r.mode = mode;
  r.scenario = spec.name;
  r.dt_tx_s = cfg.dt_tx_seconds();
  r.dt_cosim_s = cfg.dt_cosim_seconds();
  r.config = config_echo(spec);
  for (const auto& d : model.ders) r.der_ids.push_back(d.id);
  r.der_events = spec.der_events;
  std::uint64_t nonconverged = 0;

  const auto record = [&](SimTime t, double v, double f, const coupling::DxModel::Result& res, double p, double q) {
    r.t_s.push_back(t.seconds());
    r.v_pcc.push_back(v);
    r.freq.push_back(f);
    r.p_dx.push_back(p);
    r.q_dx.push_back(q);
    if (t.ticks() % cfg.dt_cosim == 0) {
      r.der_outputs.push_back({t.ticks() / cfg.dt_cosim, t.seconds(), res.pf.outputs.per_der});
    }
    if (res.overrun) r.overruns.push_back(*res.overrun);
  };

  if (mode == RunMode::MonolithicDx) {
    double p = 0.0, q = 0.0;
    for (std::int64_t n = 0; n <= ticks; ++n) {
      const auto t = SimTime::at_step(n, dt);
      const auto ref = tx::evaluate_reference(program, t);
      const auto res = dx.solve(t, ref.v_ref_pu, 0.0, ref.freq_hz);
      if (res.load.converged) {
        p = res.load.p_mw;
        q = res.load.q_mvar;
      } else {
        ++nonconverged;
      }
      record(t, ref.v_ref_pu, ref.freq_hz, res, p, q);
    }
  } else {
    tx::TxSimulator sim(spec.network(), dt);
    coupling::settle_initial_state(sim, dx, spec.line.to_bus, cfg);
    const auto poi = sim.network().index_of(spec.line.to_bus);
    const auto solve_at = [&](const tx::TxState& s) {
      const auto& v = s.bus_voltages[poi];
      return dx.solve(s.time, std::abs(v), std::arg(v), s.freq_hz);
    };
    auto res = solve_at(sim.state());
    double p = res.load.p_mw, q = res.load.q_mvar;
    record(sim.state().time, std::abs(sim.state().bus_voltages[poi]), sim.state().freq_hz, res, p, q);
    for (std::int64_t n = 1; n <= ticks; ++n) {
      sim.post_spot_load(spec.line.to_bus, p / cfg.base_mva_tx, q / cfg.base_mva_tx);
      const auto& s = sim.step();
      res = solve_at(s);
      if (res.load.converged) {
        p = res.load.p_mw;
        q = res.load.q_mvar;
      } else {
        ++nonconverged;
      }
      record(s.time, std::abs(s.bus_voltages[poi]), s.freq_hz, res, p, q);
    }
  }
  r.counters["nonconverged_solves"] = nonconverged;
  return r;
}

json endpoint_process_config(const ScenarioSpec& spec, const std::string& run_id, const std::string& host,
                             std::uint16_t port) {
  json j;
  j["schema"] = "tdcosim.dx_endpoint/1";
  j["run_id"] = run_id;
  j["poi_id"] = spec.line.to_bus;
  j["model"] = der::feeder_model_to_json(spec.feeder_model());
  j["der_events"] = json::array();
  for (const auto& e : spec.der_events) j["der_events"].push_back(coupling::der_event_to_json(e));
  j["cosim"] = {{"dt_tx_s", spec.config.dt_tx_seconds()},
                {"dt_cosim_s", spec.config.dt_cosim_seconds()},
                {"max_der_pf_iterations", spec.config.max_der_pf_iterations},
                {"pf_tolerance", spec.config.pf_tolerance},
                {"base_mva_tx", spec.config.base_mva_tx},
                {"base_mva_feeder", spec.config.base_mva_feeder}};
  j["mqtt"] = {{"host", host}, {"port", port}};
  return j;
}

std::int64_t run_endpoint_process(const json& j) {
  try {
    if (j.value("schema", std::string()) != "tdcosim.dx_endpoint/1") {
      throw ConfigError("not a distribution endpoint config");
    }
    const auto& c = j.at("cosim");
    auto cfg = make_config(c.at("dt_tx_s").get<double>(), c.at("dt_cosim_s").get<double>());
    cfg.max_der_pf_iterations = c.at("max_der_pf_iterations").get<int>();
    cfg.pf_tolerance = c.at("pf_tolerance").get<double>();
    cfg.base_mva_tx = c.at("base_mva_tx").get<double>();
    cfg.base_mva_feeder = c.at("base_mva_feeder").get<double>();
    auto model = der::feeder_model_from_json(j.at("model"));
    std::vector<coupling::DerEvent> events;
    for (const auto& e : j.at("der_events")) events.push_back(coupling::der_event_from_json(e));
    const coupling::TopicMap topics(j.at("run_id").get<std::string>(), j.at("poi_id").get<std::string>(),
                                    model.feeder.id());
    coupling::MqttOptions o;
    o.host = j.at("mqtt").at("host").get<std::string>();
    o.port = j.at("mqtt").at("port").get<std::uint16_t>();
    o.client_id = topics.dx_client_id();
    coupling::MqttTransport transport(o);
    coupling::EndpointOptions eo;
    eo.record_der_outputs = false;
    coupling::DistributionEndpoint endpoint(transport, topics, coupling::DxModel(std::move(model), events, cfg), eo);
    endpoint.start();
    transport.publish(topics.control_topic(), coupling::encode(coupling::ControlMessage{"ready"}));
    endpoint.wait();
    transport.wait_acked(2s);
    return static_cast<std::int64_t>(endpoint.record().replies.size());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad endpoint config: ") + e.what());
  }
}

}  // namespace tdcosim::harness
