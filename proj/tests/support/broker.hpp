#pragma once

// Locates an MQTT broker for integration tests: COSIM_MQTT_HOST/PORT when
// set, otherwise a private amqtt instance on a free local port.

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

namespace tdcosim::testing {

class TestBroker {
 public:
  TestBroker(const TestBroker&) = delete;
  TestBroker& operator=(const TestBroker&) = delete;
  ~TestBroker() {
    if (pid_ > 0) {
      ::kill(pid_, SIGTERM);
      int status = 0;
      for (int i = 0; i < 50 && ::waitpid(pid_, &status, WNOHANG) == 0; ++i) {
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
      }
      ::kill(pid_, SIGKILL);
      ::waitpid(pid_, &status, 0);
    }
    if (!config_path_.empty()) std::remove(config_path_.c_str());
  }

  const std::string& host() const { return host_; }
  std::uint16_t port() const { return port_; }
  bool spawned() const { return pid_ > 0; }

  /// nullptr (with `why` filled in) when no broker can be found or started.
  static std::unique_ptr<TestBroker> acquire(std::string& why) {
    if (const char* h = std::getenv("COSIM_MQTT_HOST"); h && *h) {
      const char* p = std::getenv("COSIM_MQTT_PORT");
      auto b = std::unique_ptr<TestBroker>(new TestBroker);
      b->host_ = h;
      b->port_ = static_cast<std::uint16_t>(p && *p ? std::atoi(p) : 1883);
      if (reachable(b->host_, b->port_)) return b;
      why = "COSIM_MQTT_HOST is set but " + b->host_ + ":" + std::to_string(b->port_) + " is unreachable";
      return nullptr;
    }
    const std::string exe = find_in_path("amqtt");
    if (exe.empty()) {
      why = "no COSIM_MQTT_HOST and no amqtt executable on PATH";
      return nullptr;
    }
    auto b = std::unique_ptr<TestBroker>(new TestBroker);
    b->host_ = "127.0.0.1";
    b->port_ = free_port();
    b->config_path_ = "/tmp/tdcosim-broker-" + std::to_string(::getpid()) + "-" + std::to_string(b->port_) + ".yaml";
    {
      std::ofstream cfg(b->config_path_);
      cfg << "listeners:\n  default:\n    type: tcp\n    bind: 127.0.0.1:" << b->port_
          << "\nplugins:\n  amqtt.plugins.authentication.AnonymousAuthPlugin:\n    allow_anonymous: true\n";
    }
    std::fflush(nullptr);
    const pid_t pid = ::fork();
    if (pid == 0) {
      const int null_fd = ::open("/dev/null", O_WRONLY);
      ::dup2(null_fd, 1);
      ::dup2(null_fd, 2);
      ::execl(exe.c_str(), exe.c_str(), "-c", b->config_path_.c_str(), static_cast<char*>(nullptr));
      std::_Exit(127);
    }
    b->pid_ = pid;
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(20);
    while (std::chrono::steady_clock::now() < deadline) {
      if (reachable(b->host_, b->port_)) return b;
      int status = 0;
      if (::waitpid(pid, &status, WNOHANG) == pid) {
        b->pid_ = -1;
        why = "amqtt exited during startup";
        return nullptr;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
    why = "amqtt did not start listening within 20 s";
    return nullptr;
  }

 private:
  TestBroker() = default;

  static std::string find_in_path(const std::string& name) {
    const char* path = std::getenv("PATH");
    std::stringstream ss(path ? path : "");
    std::string dir;
    while (std::getline(ss, dir, ':')) {
      const std::string candidate = dir + "/" + name;
      if (::access(candidate.c_str(), X_OK) == 0) return candidate;
    }
    return {};
  }

  static std::uint16_t free_port() {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = 0;
    ::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr);
    socklen_t len = sizeof addr;
    ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
    ::close(fd);
    return ntohs(addr.sin_port);
  }

  static bool reachable(const std::string& host, std::uint16_t port) {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host == "localhost" ? "127.0.0.1" : host.c_str(), &addr.sin_addr) != 1) {
      ::close(fd);
      return false;
    }
    const bool ok = ::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0;
    ::close(fd);
    return ok;
  }

  std::string host_;
  std::uint16_t port_ = 0;
  pid_t pid_ = -1;
  std::string config_path_;
};

}  // namespace tdcosim::testing
