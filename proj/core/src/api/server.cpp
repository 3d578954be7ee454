#include "airq/api/server.hpp"

#include <charconv>
#include <cmath>
#include <thread>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <nlohmann/json.hpp>

#include "airq/api/report.hpp"
#include "airq/error.hpp"
#include "airq/time.hpp"

namespace airq::api {

using nlohmann::json;

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidParameter:
    case ErrorCode::kInsufficientData:
    case ErrorCode::kDegenerateData:
    case ErrorCode::kParse:
    case ErrorCode::kSchema:
    case ErrorCode::kRange:
      return 400;
    case ErrorCode::kNotFound:
    case ErrorCode::kRouting:
      return 404;
    default:
      return 500;
  }
}

namespace {

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message,
                const std::vector<std::string>& fields = {}) {
  json body = {{"code", code}, {"message", message}};
  if (!fields.empty()) body["field"] = fields.front();
  send_json(res, body, status);
}

void send_error(httplib::Response& res, const Error& e) {
  send_error(res, http_status(e.code()), std::string(to_string(e.code())), e.what(), e.fields());
}

std::optional<std::string> param(const httplib::Request& req, const char* name) {
  if (!req.has_param(name)) return std::nullopt;
  return req.get_param_value(name);
}

// Query decoding turns an unescaped '+' into a space; put it back for offsets.
Timestamp ts_param(const std::string& raw, const char* name) {
  std::string text = raw;
  for (auto& ch : text)
    if (ch == ' ') ch = '+';
  try {
    return parse_iso8601(text);
  } catch (const Error& e) {
    throw Error(ErrorCode::kParse, std::string(name) + ": " + e.what(), {name});
  }
}

std::size_t size_param(const std::string& text, const char* name) {
  std::size_t v = 0;
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (text.empty() || res.ec != std::errc{} || res.ptr != end)
    fail(ErrorCode::kInvalidParameter, std::string(name) + " must be a non-negative integer", {name});
  return v;
}

double double_param(const std::string& text, const char* name) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (text.empty() || res.ec != std::errc{} || res.ptr != end || !std::isfinite(v))
    fail(ErrorCode::kInvalidParameter, std::string(name) + " must be a finite number", {name});
  return v;
}

json body_json(const httplib::Request& req) {
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kParse, std::string("request body is not valid JSON: ") + e.what());
  }
}

}  // namespace

struct ApiServer::Impl {
  ingest::Ingestor& ingestor;
  ingest::FeedStore& store;
  ApiOptions options;
  httplib::Server server;
  std::uint16_t bound_port = 0;
  bool bound = false;
  std::thread thread;

  Impl(ingest::Ingestor& i, ApiOptions o) : ingestor(i), store(i.store()), options(std::move(o)) {
    routes();
  }

  // Runs a handler, translating library errors into JSON error bodies.
  template <class F>
  auto guarded(F f) {
    return [f = std::move(f)](const httplib::Request& req, httplib::Response& res) {
      try {
        f(req, res);
      } catch (const Error& e) {
        send_error(res, e);
      } catch (const std::exception& e) {
        spdlog::error("http {} {}: {}", req.method, req.path, e.what());
        send_error(res, 500, "internal", e.what());
      }
    };
  }

  void routes() {
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
    server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Methods", "GET, PUT, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
      res.status = 204;
    });
    server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
      if (res.body.empty()) {
        const auto code = res.status == 404 ? "not_found" : "http_error";
        send_error(res, res.status, code, "no route for " + req.method + " " + req.path);
      }
    });
    server.set_logger([](const httplib::Request& req, const httplib::Response& res) {
      spdlog::debug("http {} {} -> {}", req.method, req.path, res.status);
    });

    server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
      send_json(res, {{"status", "ok"}, {"time", format_iso8601(now_utc())}});
    });

    server.Get("/metrics", guarded([this](const httplib::Request&, httplib::Response& res) {
      const auto m = ingestor.metrics();
      send_json(res, {{"received", m.received},
                      {"ingested", m.ingested},
                      {"duplicates", m.duplicates},
                      {"rejected", m.rejected},
                      {"routing_errors", m.routing_errors},
                      {"dead_lettered", m.dead_lettered}});
    }));

    server.Get("/dead-letters", guarded([this](const httplib::Request&, httplib::Response& res) {
      json arr = json::array();
      for (const auto& d : ingestor.dead_letters().recent())
        arr.push_back({{"received", format_iso8601(d.received)},
                       {"topic", d.topic},
                       {"payload", d.payload},
                       {"code", std::string(to_string(d.code))},
                       {"reason", d.reason}});
      send_json(res, {{"total", ingestor.dead_letters().size()}, {"dead_letters", arr}});
    }));

    server.Get("/channels", guarded([this](const httplib::Request&, httplib::Response& res) {
      json arr = json::array();
      for (const auto& c : store.channels()) {
        json j = ingest::to_json(c);
        j["entries"] = store.size(c.channel_id);
        arr.push_back(std::move(j));
      }
      send_json(res, {{"channels", arr}});
    }));

    server.Get(R"(/channels/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto c = store.channel(req.matches[1]);
      json j = ingest::to_json(c);
      j["entries"] = store.size(c.channel_id);
      send_json(res, j);
    }));

    server.Get(R"(/channels/([^/]+)/feed)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      ingest::FeedQuery q;
      q.channel_id = req.matches[1];
      if (auto v = param(req, "start")) q.start = ts_param(*v, "start");
      if (auto v = param(req, "end")) q.end = ts_param(*v, "end");
      if (auto v = param(req, "limit")) q.max_results = size_param(*v, "limit");
      if (auto v = param(req, "agg")) q.aggregation = ingest::aggregation_from_string(*v);
      const auto result = store.query(q);
      const auto latest = store.latest(q.channel_id);
      send_json(res, feed_json(result, latest ? latest->entry_id : 0));
    }));

    server.Get(R"(/channels/([^/]+)/salubrity/latest)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const std::string id = req.matches[1];
                 store.channel(id);
                 const auto latest = store.latest(id);
                 if (!latest || !latest->derived_salubrity)
                   fail(ErrorCode::kNotFound, "channel '" + id + "' has no entries", {"channel_id"});
                 json j = salubrity::to_json(*latest->derived_salubrity);
                 j["channel_id"] = id;
                 j["entry_id"] = latest->entry_id;
                 j["ts"] = format_iso8601(latest->ts);
                 send_json(res, j);
               }));

    server.Get("/salubrity/config", [this](const httplib::Request&, httplib::Response& res) {
      send_json(res, salubrity::to_json(options.salubrity));
    });

    server.Get("/salubrity/surface", guarded([this](const httplib::Request& req, httplib::Response& res) {
      std::size_t steps = 25;
      double t_min = 10, t_max = 35, h_min = 20, h_max = 90;
      if (auto v = param(req, "steps")) steps = size_param(*v, "steps");
      if (steps > options.max_surface_steps)
        fail(ErrorCode::kInvalidParameter,
             "steps must be at most " + std::to_string(options.max_surface_steps), {"steps"});
      if (auto v = param(req, "t_min")) t_min = double_param(*v, "t_min");
      if (auto v = param(req, "t_max")) t_max = double_param(*v, "t_max");
      if (auto v = param(req, "h_min")) h_min = double_param(*v, "h_min");
      if (auto v = param(req, "h_max")) h_max = double_param(*v, "h_max");
      const auto grid = salubrity::surface_grid(options.salubrity, t_min, t_max, h_min, h_max, steps);
      send_json(res, salubrity::to_json(grid));
    }));

    server.Get(R"(/channels/([^/]+)/alerts/config)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const std::string id = req.matches[1];
                 send_json(res, config_body(id));
               }));

    server.Put(R"(/channels/([^/]+)/alerts/config)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const std::string id = req.matches[1];
                 store.channel(id);
                 const json body = body_json(req);
                 const json& list = body.is_object() && body.contains("rules") ? body["rules"] : body;
                 if (!list.is_array())
                   fail(ErrorCode::kSchema, "body must be an array of alert rules", {"rules"});
                 std::vector<ingest::AlertRule> rules;
                 for (const auto& r : list) rules.push_back(ingest::alert_rule_from_json(r));
                 ingestor.set_rules(id, std::move(rules));
                 send_json(res, config_body(id));
               }));

    server.Get(R"(/channels/([^/]+)/alerts/events)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const std::string id = req.matches[1];
                 store.channel(id);
                 Timestamp start = Timestamp::min();
                 Timestamp end = Timestamp::max();
                 if (auto v = param(req, "start")) start = ts_param(*v, "start");
                 if (auto v = param(req, "end")) end = ts_param(*v, "end");
                 if (start > end) fail(ErrorCode::kInvalidParameter, "start is after end", {"start"});
                 json arr = json::array();
                 for (const auto& e : ingestor.events(id, start, end)) arr.push_back(ingest::to_json(e));
                 send_json(res, {{"channel_id", id}, {"events", arr}});
               }));

    server.Post("/reports", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto r = report_request_from_json(body_json(req));
      const auto result = store.query(to_query(r));
      if (r.format == ReportFormat::kCsv) {
        res.set_header("Content-Disposition",
                       "attachment; filename=\"" + r.channel_id + "-report.csv\"");
        res.set_content(report_csv(result), "text/csv");
      } else {
        json j = report_json(result);
        if (r.start != Timestamp::min()) j["start"] = format_iso8601(r.start);
        if (r.end != Timestamp::max()) j["end"] = format_iso8601(r.end);
        send_json(res, j);
      }
    }));

    if (options.static_dir) {
      if (!server.set_mount_point("/", options.static_dir->string()))
        fail(ErrorCode::kConfig, "static_dir '" + options.static_dir->string() + "' is not a directory",
             {"static_dir"});
    }
  }

  json config_body(const std::string& id) const {
    store.channel(id);
    json rules = json::array();
    for (const auto& r : ingestor.rules(id)) rules.push_back(ingest::to_json(r));
    json states = json::object();
    for (const auto& [rule_id, s] : ingestor.states(id)) states[rule_id] = ingest::to_json(s);
    return {{"channel_id", id}, {"rules", rules}, {"states", states}};
  }
};

ApiServer::ApiServer(ingest::Ingestor& ingestor, ApiOptions options)
    : impl_(std::make_unique<Impl>(ingestor, std::move(options))) {}

ApiServer::~ApiServer() { stop(); }

std::uint16_t ApiServer::bind(const std::string& host, std::uint16_t port) {
  int bound = -1;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else {
    bound = impl_->server.bind_to_port(host, port) ? port : -1;
  }
  if (bound <= 0)
    fail(ErrorCode::kNetwork, "cannot bind HTTP listener to " + host + ":" + std::to_string(port),
         {"http.port"});
  impl_->bound_port = static_cast<std::uint16_t>(bound);
  impl_->bound = true;
  return impl_->bound_port;
}

std::uint16_t ApiServer::port() const { return impl_->bound_port; }

void ApiServer::run() {
  if (!impl_->bound) fail(ErrorCode::kNetwork, "HTTP listener is not bound");
  impl_->server.listen_after_bind();
}

void ApiServer::start() {
  if (!impl_->bound) fail(ErrorCode::kNetwork, "HTTP listener is not bound");
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void ApiServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace airq::api
