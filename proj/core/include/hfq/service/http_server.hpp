#pragma once

#include "hfq/service/session_manager.hpp"

#include <memory>
#include <string>

namespace hfq {

std::string session_to_json_text(const SessionState& state, const ModelBundle& bundle);

// JSON-over-HTTP front end for a SessionManager.
//
//   POST   /v1/sessions                 create
//   GET    /v1/sessions/{id}/next-query propose next query
//   POST   /v1/sessions/{id}/answers    submit answer
//   GET    /v1/sessions/{id}            read state
//   DELETE /v1/sessions/{id}            close
//   GET    /v1/models                   list loaded models
//
// Errors: {"error": {"code": "<category>", "message": "..."}}.
class HttpServer {
 public:
  explicit HttpServer(SessionManager& sessions);
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Returns the bound port; port 0 picks a free one.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  bool listen();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace hfq
