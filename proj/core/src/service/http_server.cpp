#include "hfq/service/http_server.hpp"

#include "../detail/json_util.hpp"
#include "hfq/error.hpp"

#include "httplib.h"

#include <ctime>

namespace hfq {

using detail::json;

namespace {

json vec(const Vector& v) { return detail::flatten(v.transpose()); }

std::string iso_time(std::chrono::system_clock::time_point t) {
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(t.time_since_epoch()).count();
  const std::time_t secs = static_cast<std::time_t>(ms / 1000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char date[32];
  std::strftime(date, sizeof(date), "%Y-%m-%dT%H:%M:%S", &tm);
  char frac[8];
  std::snprintf(frac, sizeof(frac), ".%03dZ", static_cast<int>(ms % 1000));
  return std::string(date) + frac;
}

json candidates_json(const std::vector<CandidateScore>& cands, const FeatureSpace& space) {
  json out = json::array();
  for (const auto& c : cands) {
    out.push_back({{"dimension", c.dimension},
                   {"feature", space.human_names[c.dimension]},
                   {"expected_entropy", c.expected_entropy}});
  }
  return out;
}

json optional_vec(const std::optional<Vector>& v) { return v ? vec(*v) : json(nullptr); }

json session_json(const SessionState& s, const ModelBundle& bundle) {
  const auto& space = bundle.joint.space;
  json steps = json::array();
  for (std::size_t i = 0; i < s.trace.steps.size(); ++i) {
    const auto& st = s.trace.steps[i];
    const Vector& masked = s.masked_predictions[i];
    steps.push_back({{"dimension", st.dimension},
                     {"feature", space.human_names[st.dimension]},
                     {"answer", st.answer},
                     {"free_choice", st.free_choice},
                     {"prediction", vec(st.prediction)},
                     {"masked_prediction", masked.size() > 0 ? vec(masked) : json(nullptr)},
                     {"candidates", candidates_json(st.candidates, space)}});
  }
  const std::optional<Vector> current_masked =
      s.trace.steps.empty() ? s.initial_masked_prediction
                            : (s.masked_predictions.back().size() > 0 ? std::optional<Vector>(s.masked_predictions.back())
                                                                       : std::nullopt);
  return {{"id", s.id},
          {"model_id", s.model_id},
          {"status", std::string(to_string(s.status))},
          {"strict", s.strict},
          {"budget", s.budget},
          {"remaining_budget", s.remaining_budget},
          {"mode",
           {{"kind", s.mode.is_exact() ? "exact" : "mc"}, {"samples", s.mode.samples}, {"seed", s.mode.seed}}},
          {"classes", space.class_names},
          {"x_machine", vec(s.x_machine)},
          {"prediction", vec(s.current_prediction())},
          {"masked_prediction", optional_vec(current_masked)},
          {"initial_prediction", vec(s.trace.initial_prediction)},
          {"initial_masked_prediction", optional_vec(s.initial_masked_prediction)},
          {"steps", steps},
          {"created_at", iso_time(s.created_at)},
          {"updated_at", iso_time(s.updated_at)}};
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::not_found: return 404;
    case ErrorCode::conflict:
    case ErrorCode::budget_exhausted: return 409;
    case ErrorCode::validation:
    case ErrorCode::invalid_input:
    case ErrorCode::invalid_answer:
    case ErrorCode::parse: return 400;
    case ErrorCode::capacity: return 422;
    default: return 500;
  }
}

void send(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
  send(res, status, {{"error", {{"code", std::string(code)}, {"message", message}}}});
}

json parse_body(const httplib::Request& req) { return detail::parse_json(req.body, "request body"); }

template <typename F>
httplib::Server::Handler guarded(F body) {
  return [body](const httplib::Request& req, httplib::Response& res) {
    try {
      body(req, res);
    } catch (const Error& e) {
      send_error(res, http_status(e.code()), to_string(e.code()), e.what());
    } catch (const json::exception& e) {
      send_error(res, 400, "validation", e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "internal", e.what());
    }
  };
}

}  // namespace

std::string session_to_json_text(const SessionState& state, const ModelBundle& bundle) {
  return session_json(state, bundle).dump();
}

struct HttpServer::Impl {
  SessionManager& sessions;
  httplib::Server server;

  explicit Impl(SessionManager& s) : sessions(s) {}

  void routes() {
    server.set_pre_routing_handler([this](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Origin", "*");
      sessions.expire_idle();
      return httplib::Server::HandlerResponse::Unhandled;
    });
    server.Options(R"(/v1/.*)", [](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
      res.status = 204;
    });

    server.Get("/v1/models", guarded([this](const httplib::Request&, httplib::Response& res) {
      json models = json::array();
      for (const auto& info : sessions.models()) {
        const auto bundle = sessions.model(info.id);
        models.push_back({{"id", info.id},
                          {"machine_features", bundle->joint.space.machine_names},
                          {"human_features", bundle->joint.space.human_names},
                          {"classes", info.classes},
                          {"masked_budgets", info.masked_budgets}});
      }
      send(res, 200, {{"models", models}});
    }));

    server.Post("/v1/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const json body = parse_body(req);
      require(body.is_object(), ErrorCode::validation, "request body must be an object");
      require(body.contains("model_id") && body["model_id"].is_string(), ErrorCode::validation,
              "model_id (string) is required");
      require(body.contains("x_machine") && body["x_machine"].is_array(), ErrorCode::validation,
              "x_machine (array of 0/1) is required");
      std::vector<double> xm;
      std::string bad;
      for (std::size_t i = 0; i < body["x_machine"].size(); ++i) {
        const auto& v = body["x_machine"][i];
        if (!v.is_number()) {
          bad += (bad.empty() ? "" : ",") + std::to_string(i);
          continue;
        }
        xm.push_back(v.get<double>());
      }
      require(bad.empty(), ErrorCode::validation, "x_machine entries must be numbers; offending indices: " + bad);
      std::optional<std::size_t> budget;
      if (body.contains("budget") && !body["budget"].is_null()) {
        require(body["budget"].is_number_unsigned(), ErrorCode::validation, "budget must be a non-negative integer");
        budget = body["budget"].get<std::size_t>();
      }
      std::optional<bool> strict;
      if (body.contains("strict") && !body["strict"].is_null()) {
        require(body["strict"].is_boolean(), ErrorCode::validation, "strict must be a boolean");
        strict = body["strict"].get<bool>();
      }
      const auto state = sessions.create(body["model_id"].get<std::string>(), xm, budget, strict);
      send(res, 201, session_json(state, *sessions.model(state.model_id)));
    }));

    server.Get(R"(/v1/sessions/([^/]+)/next-query)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const std::string id = req.matches[1];
                 const auto p = sessions.next_query(id);
                 const auto state = sessions.get(id);
                 const auto& space = sessions.model(state.model_id)->joint.space;
                 send(res, 200,
                      {{"session_id", id},
                       {"dimension", p.dimension},
                       {"feature", p.feature},
                       {"expected_entropy", p.expected_entropy},
                       {"remaining_budget", state.remaining_budget},
                       {"candidates", candidates_json(p.candidates, space)}});
               }));

    server.Post(R"(/v1/sessions/([^/]+)/answers)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const std::string id = req.matches[1];
                  const json body = parse_body(req);
                  require(body.is_object(), ErrorCode::validation, "request body must be an object");
                  require(body.contains("dimension") && body["dimension"].is_number_unsigned(),
                          ErrorCode::validation, "dimension (non-negative integer) is required");
                  require(body.contains("value") && body["value"].is_number_integer(), ErrorCode::validation,
                          "value must be 0 or 1");
                  const auto out = sessions.submit_answer(id, body["dimension"].get<std::size_t>(),
                                                          body["value"].get<int>());
                  const auto state = sessions.get(id);
                  send(res, 200,
                       {{"session_id", id},
                        {"prediction", vec(out.prediction)},
                        {"masked_prediction", optional_vec(out.masked_prediction)},
                        {"remaining_budget", out.remaining_budget},
                        {"status", std::string(to_string(out.status))},
                        {"classes", sessions.model(state.model_id)->joint.space.class_names}});
                }));

    server.Get(R"(/v1/sessions/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const auto state = sessions.get(req.matches[1]);
                 send(res, 200, session_json(state, *sessions.model(state.model_id)));
               }));

    server.Delete(R"(/v1/sessions/([^/]+))",
                  guarded([this](const httplib::Request& req, httplib::Response& res) {
                    const std::string id = req.matches[1];
                    sessions.close(id);
                    send(res, 200, {{"id", id}, {"status", "closed"}});
                  }));

    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (res.body.empty()) {
        send_error(res, res.status, res.status == 404 ? "not_found" : "http",
                   "no such endpoint or method (HTTP " + std::to_string(res.status) + ")");
      }
    });
  }
};

HttpServer::HttpServer(SessionManager& sessions) : impl_(std::make_unique<Impl>(sessions)) { impl_->routes(); }

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    require(bound > 0, ErrorCode::io, "cannot bind " + host);
    return bound;
  }
  require(impl_->server.bind_to_port(host, port), ErrorCode::io,
          "cannot bind " + host + ":" + std::to_string(port));
  return port;
}

bool HttpServer::listen() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace hfq
