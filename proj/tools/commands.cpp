#include "commands.hpp"

#include <csignal>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "airq/analytics/model_io.hpp"
#include "airq/analytics/plot_export.hpp"
#include "airq/api/report.hpp"
#include "airq/api/server.hpp"
#include "airq/config.hpp"
#include "airq/format.hpp"
#include "airq/ingest/subscriber.hpp"
#include "airq/mqtt/broker.hpp"
#include "airq/mqtt/client.hpp"
#include "airq/sim/scenario.hpp"
#include "airq/time.hpp"
#include "airq/workspace.hpp"

namespace airq::cli {

using nlohmann::json;
namespace fs = std::filesystem;

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig: return kConfigError;
    case ErrorCode::kInvalidParameter:
    case ErrorCode::kParse:
    case ErrorCode::kSchema:
    case ErrorCode::kRange: return kBadInput;
    case ErrorCode::kInsufficientData: return kInsufficient;
    case ErrorCode::kDegenerateData: return kDegenerate;
    case ErrorCode::kNotFound:
    case ErrorCode::kRouting: return kMissing;
    case ErrorCode::kNetwork:
    case ErrorCode::kProtocol: return kNetworkError;
    case ErrorCode::kScenarioAbort: return kAborted;
    case ErrorCode::kIo: return kIoError;
    case ErrorCode::kSaturatedReading: return kSaturated;
  }
  return kInternal;
}

namespace {

ServiceConfig service_config(const Common& c) {
  ServiceConfig cfg = c.config ? load_config(*c.config) : ServiceConfig{};
  apply_env_overrides(cfg);
  if (c.data_dir) cfg.data_dir = *c.data_dir;
  return cfg;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) fail(ErrorCode::kIo, "cannot write '" + path + "'");
}

json read_json_file(const std::string& path) {
  const auto text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kParse, path + ": " + e.what());
  }
}

double parse_number(const std::string& cell, const std::string& column, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used != cell.size() || !std::isfinite(v)) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    fail(ErrorCode::kParse,
         "line " + std::to_string(line) + ": column " + column + " is not a number: '" + cell + "'",
         {column});
  }
}

struct CsvTable {
  std::map<std::string, std::size_t> columns;
  std::vector<std::vector<std::string>> rows;  // data rows only
  std::optional<std::size_t> col(const std::string& name) const {
    auto it = columns.find(name);
    if (it == columns.end()) return std::nullopt;
    return it->second;
  }
  std::size_t need(const std::string& name) const {
    auto c = col(name);
    if (!c) fail(ErrorCode::kSchema, "CSV is missing column '" + name + "'", {name});
    return *c;
  }
};

CsvTable read_csv(const std::string& path) {
  auto records = csv_parse(read_file(path));
  if (records.empty()) fail(ErrorCode::kSchema, path + ": CSV has no header row");
  CsvTable t;
  for (std::size_t i = 0; i < records[0].size(); ++i) t.columns[records[0][i]] = i;
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() == 1 && records[r][0].empty()) continue;
    if (records[r].size() != records[0].size())
      fail(ErrorCode::kSchema, path + ": line " + std::to_string(r + 1) + " has " +
                                   std::to_string(records[r].size()) + " fields, header has " +
                                   std::to_string(records[0].size()));
    t.rows.push_back(std::move(records[r]));
  }
  return t;
}

sigset_t block_stop_signals() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  return set;
}

int wait_for_signal(const sigset_t& set) {
  int sig = 0;
  sigwait(&set, &sig);
  return sig;
}

bool is_device_channel(const ingest::Channel& c) {
  const auto dev = ingest::device_channel(c.channel_id);
  if (dev.fields.size() != c.fields.size()) return false;
  for (std::size_t i = 0; i < c.fields.size(); ++i)
    if (dev.fields[i].name != c.fields[i].name) return false;
  return true;
}

}  // namespace

int serve(const ServeArgs& a) {
  auto cfg = service_config(a.common);
  if (a.bind) cfg.http.bind = *a.bind;
  if (a.port) {
    if (*a.port < 0 || *a.port > 65535) fail(ErrorCode::kConfig, "--port must be in 0..65535", {"http.port"});
    cfg.http.port = static_cast<std::uint16_t>(*a.port);
  }
  if (a.broker) cfg.broker.uri = *a.broker;
  mqtt::BrokerUri uri;
  try {
    uri = mqtt::BrokerUri::parse(cfg.broker.uri);
  } catch (const Error& e) {
    fail(ErrorCode::kConfig, std::string("invalid broker URI: ") + e.what(), {"broker.uri"});
  }

  const auto signals = block_stop_signals();

  std::optional<mqtt::Broker> embedded;
  if (cfg.broker.embedded) {
    embedded.emplace(uri.host, uri.port);
    spdlog::info("embedded broker listening on {}", embedded->uri());
  }

  Workspace ws(cfg);
  ingest::SubscriberOptions so;
  so.broker = uri;
  so.client.client_id = cfg.broker.client_id;
  so.client.username = cfg.broker.username;
  so.client.password = cfg.broker.password;
  ingest::MqttSubscriber subscriber(ws.ingestor(), so);
  subscriber.start();

  api::ApiOptions ao;
  ao.salubrity = cfg.salubrity;
  ao.static_dir = cfg.static_dir;
  api::ApiServer server(ws.ingestor(), ao);
  const auto port = server.bind(cfg.http.bind, cfg.http.port);
  server.start();
  spdlog::info("ready: http://{}:{} data_dir={} broker={}", cfg.http.bind, port, cfg.data_dir.string(),
               uri.to_string());

  const int sig = wait_for_signal(signals);
  spdlog::info("received signal {}, shutting down", sig);
  server.stop();
  subscriber.stop();
  if (embedded) embedded->stop();
  return kOk;
}

int simulate(const SimulateArgs& a) {
  ServiceConfig cfg;
  if (a.common.config || a.common.data_dir) {
    cfg = service_config(a.common);
  } else {
    apply_env_overrides(cfg);
    cfg.data_dir.clear();
  }
  auto scn = sim::scenario_from_json(read_json_file(a.scenario));
  if (a.seed) scn.seed = *a.seed;
  scn.validate();
  sim::RunOptions ro;
  ro.realtime = a.realtime;

  if (a.loopback) {
    Workspace ws(cfg);
    ws.ensure_device_channel(scn.device_id);
    auto& ingestor = ws.ingestor();
    const auto published = sim::run_scenario(
        scn, cfg.dht11, cfg.mq135,
        [&](const std::string& topic, const std::string& payload) { ingestor.handle_message(topic, payload); },
        ro);
    const auto m = ingestor.metrics();
    std::cout << "published " << published << "\n"
              << "ingested " << m.ingested << " duplicates " << m.duplicates << " rejected " << m.rejected
              << " dead_lettered " << m.dead_lettered << "\n";
    if (a.export_csv) {
      ingest::FeedQuery q;
      q.channel_id = scn.device_id;
      write_file(*a.export_csv, api::report_csv(ws.store().query(q)));
    }
    return kOk;
  }

  const auto uri = mqtt::BrokerUri::parse(a.broker ? *a.broker : cfg.broker.uri);
  mqtt::ClientOptions co;
  co.client_id = "airq-sim-" + scn.device_id;
  co.username = cfg.broker.username;
  co.password = cfg.broker.password;
  std::unique_ptr<mqtt::Client> client;
  const auto published = sim::run_scenario(
      scn, cfg.dht11, cfg.mq135,
      [&](const std::string& topic, const std::string& payload) {
        if (!client || !client->connected()) {
          client.reset();
          client = std::make_unique<mqtt::Client>(uri, co);
        }
        client->publish(topic, payload, 1);
      },
      ro);
  if (client) client->disconnect();
  std::cout << "published " << published << "\n";
  return kOk;
}

int train(const TrainArgs& a) {
  ServiceConfig cfg = a.common.config ? load_config(*a.common.config) : ServiceConfig{};
  const auto table = read_csv(a.from);
  const auto t_col = table.need("temperature_c");
  const auto h_col = table.need("humidity_pct");
  table.need("ts");
  const auto label_col = table.col("label");

  std::vector<analytics::Sample2D> samples;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    analytics::Sample2D s;
    s.x = parse_number(row[t_col], "temperature_c", r + 2);
    s.y = parse_number(row[h_col], "humidity_pct", r + 2);
    if (label_col && !row[*label_col].empty()) {
      s.label = salubrity::label_from_string(row[*label_col]);
    } else {
      s.label = salubrity::classify_salubrity(salubrity::salubrity(s.x, s.y, cfg.salubrity), a.label_threshold);
    }
    samples.push_back(s);
  }

  analytics::AnyModel model;
  if (a.model == "linreg") {
    model = analytics::fit_linear_regression(samples);
  } else if (a.model == "tree") {
    analytics::TreeParams p;
    p.max_depth = a.max_depth;
    p.min_leaf = a.min_leaf;
    model = analytics::fit_decision_tree(samples, p);
  } else if (a.model == "svm") {
    analytics::SvmParams p;
    p.c = a.c;
    p.tol = a.tol;
    p.max_iter = a.max_iter;
    model = analytics::fit_svm(samples, p);
  } else {
    fail(ErrorCode::kInvalidParameter, "unknown model '" + a.model + "' (linreg|tree|svm)", {"model"});
  }

  analytics::ModelFile file{model, samples, analytics::training_metrics(model, samples)};
  write_file(a.out, to_json(file).dump(2) + "\n");
  std::cout << file.metrics.dump() << "\n";
  return kOk;
}

int plotdata(const PlotArgs& a) {
  const auto file = analytics::model_file_from_json(read_json_file(a.model));
  const auto bounds = analytics::bounds_from_samples(file.samples, a.steps);
  const auto data = analytics::export_model_plot_data(file.model, file.samples, bounds);
  if (a.format == "csv") {
    write_file(a.out, analytics::to_csv(data));
  } else if (a.format == "json") {
    write_file(a.out, analytics::to_json(data).dump(2) + "\n");
  } else {
    fail(ErrorCode::kInvalidParameter, "format must be json or csv", {"format"});
  }
  return kOk;
}

int export_report(const ExportArgs& a) {
  auto cfg = service_config(a.common);
  Workspace ws(cfg);
  json req = {{"channel_id", a.channel}, {"aggregation", a.agg}, {"format", a.format}};
  if (a.start) req["start"] = *a.start;
  if (a.end) req["end"] = *a.end;
  const auto r = api::report_request_from_json(req);
  const auto result = ws.store().query(api::to_query(r));
  const std::string text =
      r.format == api::ReportFormat::kCsv ? api::report_csv(result) : api::report_json(result).dump(2) + "\n";
  if (a.out) {
    write_file(*a.out, text);
  } else {
    std::cout << text;
  }
  return kOk;
}

int import_csv(const ImportArgs& a) {
  auto cfg = service_config(a.common);
  Workspace ws(cfg);
  if (!ws.store().has_channel(a.channel)) ws.ensure_device_channel(a.channel);
  const auto channel = ws.store().channel(a.channel);
  const auto table = read_csv(a.from);
  const auto ts_col = table.need("ts");
  std::vector<std::size_t> field_cols;
  for (const auto& f : channel.fields) field_cols.push_back(table.need(f.name));

  std::size_t imported = 0;
  std::size_t duplicates = 0;
  const bool device = is_device_channel(channel);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t line = r + 2;
    Timestamp ts;
    try {
      ts = parse_iso8601(row[ts_col]);
    } catch (const Error& e) {
      fail(ErrorCode::kParse, "line " + std::to_string(line) + ": " + e.what(), {"ts"});
    }
    std::vector<std::optional<double>> values;
    for (std::size_t i = 0; i < field_cols.size(); ++i) {
      const auto& cell = row[field_cols[i]];
      if (cell.empty()) {
        values.emplace_back();
      } else {
        values.emplace_back(parse_number(cell, channel.fields[i].name, line));
      }
    }
    bool stored = false;
    if (device) {
      sim::WirePayload p;
      p.ts = ts;
      p.device_id = a.channel;
      int* targets[] = {&p.temperature_c, &p.humidity_pct, &p.mq135_adc};
      for (std::size_t i = 0; i < 3; ++i) {
        if (!values[i] || std::floor(*values[i]) != *values[i])
          fail(ErrorCode::kSchema,
               "line " + std::to_string(line) + ": " + channel.fields[i].name + " must be an integer",
               {channel.fields[i].name});
        *targets[i] = static_cast<int>(*values[i]);
      }
      stored = ws.ingestor().ingest(p).entry.has_value();
    } else {
      ingest::FeedEntry e;
      e.ts = ts;
      e.device_id = a.channel;
      e.values = values;
      if (auto c = table.col("ppm"); c && !row[*c].empty()) e.derived_ppm = parse_number(row[*c], "ppm", line);
      stored = ws.store().append(a.channel, e).has_value();
    }
    (stored ? imported : duplicates)++;
  }
  std::cout << "imported " << imported << " duplicates " << duplicates << "\n";
  return kOk;
}

int broker(const BrokerArgs& a) {
  if (a.port < 0 || a.port > 65535) fail(ErrorCode::kInvalidParameter, "--port must be in 0..65535", {"port"});
  const auto signals = block_stop_signals();
  mqtt::Broker b(a.bind, static_cast<std::uint16_t>(a.port));
  spdlog::info("ready: broker listening on {}", b.uri());
  wait_for_signal(signals);
  b.stop();
  spdlog::info("broker stopped after routing {} messages", b.messages_routed());
  return kOk;
}

}  // namespace airq::cli
