#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "airq/error.hpp"

namespace airq::cli {

// Process exit status per error class.
enum Exit : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kConfigError = 3,
  kBadInput = 4,
  kInsufficient = 5,
  kDegenerate = 6,
  kMissing = 7,
  kNetworkError = 8,
  kAborted = 9,
  kIoError = 10,
  kSaturated = 11,
};

int exit_code(ErrorCode code);

struct Common {
  std::optional<std::string> config;
  std::optional<std::string> data_dir;
};

struct ServeArgs {
  Common common;
  std::optional<std::string> bind;
  std::optional<int> port;
  std::optional<std::string> broker;
};

struct SimulateArgs {
  Common common;
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> broker;
  bool loopback = false;
  bool realtime = false;
  std::optional<std::string> export_csv;
};

struct TrainArgs {
  Common common;
  std::string model;
  std::string from;
  std::string out;
  double label_threshold = 50.0;
  int max_depth = 4;
  int min_leaf = 1;
  double c = 1.0;
  double tol = 1e-3;
  int max_iter = 10000;
};

struct PlotArgs {
  std::string model;
  std::string out;
  std::string format = "json";
  std::size_t steps = 10;
};

struct ExportArgs {
  Common common;
  std::string channel;
  std::optional<std::string> start;
  std::optional<std::string> end;
  std::string agg = "none";
  std::string format = "csv";
  std::optional<std::string> out;
};

struct ImportArgs {
  Common common;
  std::string channel;
  std::string from;
};

struct BrokerArgs {
  std::string bind = "127.0.0.1";
  int port = 1883;
};

int serve(const ServeArgs& a);
int simulate(const SimulateArgs& a);
int train(const TrainArgs& a);
int plotdata(const PlotArgs& a);
int export_report(const ExportArgs& a);
int import_csv(const ImportArgs& a);
int broker(const BrokerArgs& a);

}  // namespace airq::cli
