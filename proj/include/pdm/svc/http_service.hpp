#pragma once

#include <functional>
#include <memory>
#include <string>
#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace pdm::svc {

// Owns an httplib server on its own thread. start(0) binds an ephemeral
// port, which is how tests stand up whole deployments in-process.
class HttpService {
 public:
  virtual ~HttpService();

  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  int start(const std::string& host = "127.0.0.1", int port = 0);
  void stop();

  int port() const noexcept { return port_; }
  std::string base_url() const;

  // Observes every request body after handling; used by tests that assert
  // what never crosses the wire.
  void record_requests(
      std::function<void(const std::string& path, const std::string& body)>
          recorder);

 protected:
  HttpService() = default;

  static void reply_json(httplib::Response& res, int status,
                         const nlohmann::json& body);
  static void reply_error(httplib::Response& res, int status,
                          const std::string& code, const std::string& detail);

  httplib::Server server_;

 private:
  std::thread thread_;
  std::string host_ = "127.0.0.1";
  int port_ = 0;
};

}  // namespace pdm::svc
