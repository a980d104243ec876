#include "pdm/svc/http_service.hpp"

#include <stdexcept>

namespace pdm::svc {

HttpService::~HttpService() { stop(); }

int HttpService::start(const std::string& host, int port) {
  host_ = host;
  if (port == 0) {
    port_ = server_.bind_to_any_port(host);
    if (port_ < 0) throw std::runtime_error("cannot bind a port");
  } else {
    if (!server_.bind_to_port(host, port)) {
      throw std::runtime_error("cannot bind port " + std::to_string(port));
    }
    port_ = port;
  }
  thread_ = std::thread([this] { server_.listen_after_bind(); });
  server_.wait_until_ready();
  return port_;
}

void HttpService::stop() {
  if (server_.is_running()) server_.stop();
  if (thread_.joinable()) thread_.join();
}

std::string HttpService::base_url() const {
  return "http://" + host_ + ":" + std::to_string(port_);
}

void HttpService::record_requests(
    std::function<void(const std::string&, const std::string&)> recorder) {
  server_.set_logger(
      [recorder = std::move(recorder)](const httplib::Request& req,
                                       const httplib::Response&) {
        recorder(req.path, req.body);
      });
}

void HttpService::reply_json(httplib::Response& res, int status,
                             const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void HttpService::reply_error(httplib::Response& res, int status,
                              const std::string& code,
                              const std::string& detail) {
  reply_json(res, status, {{"error", {{"code", code}, {"detail", detail}}}});
}

}  // namespace pdm::svc
