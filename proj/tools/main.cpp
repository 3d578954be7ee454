#include <iostream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "commands.hpp"

using namespace airq::cli;

namespace {

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "Service config JSON");
  cmd->add_option("--data-dir", c.data_dir, "Data directory (overrides config)");
}

}  // namespace

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_color_mt("airq");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("%Y-%m-%dT%H:%M:%S.%eZ %^%l%$ %v", spdlog::pattern_time_type::utc);

  CLI::App app{"airq: workshop air-quality monitoring"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  ServeArgs serve_args;
  auto* serve_cmd = app.add_subcommand("serve", "Run the MQTT subscriber and HTTP API");
  add_common(serve_cmd, serve_args.common);
  serve_cmd->add_option("--bind", serve_args.bind, "HTTP bind address");
  serve_cmd->add_option("--port", serve_args.port, "HTTP port (0 picks a free port)");
  serve_cmd->add_option("--broker", serve_args.broker, "Broker URI");

  SimulateArgs sim_args;
  auto* sim_cmd = app.add_subcommand("simulate", "Run a sensor scenario");
  add_common(sim_cmd, sim_args.common);
  sim_cmd->add_option("--scenario", sim_args.scenario, "Scenario JSON")->required();
  sim_cmd->add_option("--seed", sim_args.seed, "Override the scenario seed");
  sim_cmd->add_option("--broker", sim_args.broker, "Broker URI");
  sim_cmd->add_flag("--loopback", sim_args.loopback, "Ingest in-process instead of publishing");
  sim_cmd->add_flag("--realtime", sim_args.realtime, "Pace publishes at the sample period");
  sim_cmd->add_option("--export", sim_args.export_csv, "With --loopback, write the channel CSV here");

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Fit a model on a CSV export");
  train_cmd->add_option("--config", train_args.common.config, "Service config JSON (salubrity parameters)");
  train_cmd->add_option("--model", train_args.model, "linreg|tree|svm")
      ->required()
      ->check(CLI::IsMember({"linreg", "tree", "svm"}));
  train_cmd->add_option("--from", train_args.from, "CSV with ts,temperature_c,humidity_pct[,label]")->required();
  train_cmd->add_option("--out", train_args.out, "Model JSON output")->required();
  train_cmd->add_option("--label-threshold", train_args.label_threshold,
                        "Salubrity threshold for rows without a label");
  train_cmd->add_option("--max-depth", train_args.max_depth, "Tree depth limit");
  train_cmd->add_option("--min-leaf", train_args.min_leaf, "Tree minimum leaf size");
  train_cmd->add_option("--c", train_args.c, "SVM box constraint");
  train_cmd->add_option("--tol", train_args.tol, "SVM KKT tolerance");
  train_cmd->add_option("--max-iter", train_args.max_iter, "SVM iteration limit");

  PlotArgs plot_args;
  auto* plot_cmd = app.add_subcommand("plotdata", "Write the figure dataset of a model");
  plot_cmd->add_option("--model", plot_args.model, "Model JSON")->required();
  plot_cmd->add_option("--out", plot_args.out, "Output path")->required();
  plot_cmd->add_option("--format", plot_args.format, "json|csv")->check(CLI::IsMember({"json", "csv"}));
  plot_cmd->add_option("--steps", plot_args.steps, "Region grid steps per axis");

  ExportArgs export_args;
  auto* export_cmd = app.add_subcommand("export", "Export a channel report");
  add_common(export_cmd, export_args.common);
  export_cmd->add_option("--channel", export_args.channel, "Channel id")->required();
  export_cmd->add_option("--start", export_args.start, "ISO-8601 start (inclusive)");
  export_cmd->add_option("--end", export_args.end, "ISO-8601 end (exclusive)");
  export_cmd->add_option("--agg", export_args.agg, "none|hourly_mean|hourly_min|hourly_max");
  export_cmd->add_option("--format", export_args.format, "csv|json")->check(CLI::IsMember({"json", "csv"}));
  export_cmd->add_option("--out", export_args.out, "Output path (default stdout)");

  ImportArgs import_args;
  auto* import_cmd = app.add_subcommand("import", "Import a CSV export into a channel");
  add_common(import_cmd, import_args.common);
  import_cmd->add_option("--channel", import_args.channel, "Channel id")->required();
  import_cmd->add_option("--from", import_args.from, "CSV path")->required();

  BrokerArgs broker_args;
  auto* broker_cmd = app.add_subcommand("broker", "Run the bundled MQTT broker");
  broker_cmd->add_option("--bind", broker_args.bind, "Listen address");
  broker_cmd->add_option("--port", broker_args.port, "Listen port (0 picks a free port)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }
  if (verbose) spdlog::set_level(spdlog::level::debug);

  try {
    if (*serve_cmd) return serve(serve_args);
    if (*sim_cmd) return simulate(sim_args);
    if (*train_cmd) return train(train_args);
    if (*plot_cmd) return plotdata(plot_args);
    if (*export_cmd) return export_report(export_args);
    if (*import_cmd) return import_csv(import_args);
    if (*broker_cmd) return broker(broker_args);
  } catch (const airq::Error& e) {
    std::cerr << "airq: " << airq::to_string(e.code()) << ": " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "airq: internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}
