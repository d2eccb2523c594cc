#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "anonsim/buckets.hpp"
#include "anonsim/channel_graph.hpp"
#include "anonsim/core.hpp"
#include "anonsim/epoch_anon.hpp"
#include "anonsim/experiment.hpp"
#include "anonsim/path_anon.hpp"
#include "anonsim/ripple_ingest.hpp"
#include "anonsim/stats.hpp"
#include "anonsim/synthgen.hpp"
#include "manifest.hpp"

#ifndef ANONSIM_VERSION
#define ANONSIM_VERSION "0.0.0"
#endif

namespace anonsim::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Context {
  std::ostream& out;
  std::ostream& err;
  // Set while replaying a manifest: the explicit output location wins over the environment.
  bool ignore_env = false;
};

std::string num(double v) { return format_number(v); }

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string s;
  for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? std::string(1, sep) : "") + parts[i];
  return s;
}

template <typename T>
std::string join_numbers(const std::vector<T>& v) {
  std::vector<std::string> parts;
  for (const auto& x : v) parts.push_back(num(static_cast<double>(x)));
  return join(parts, ',');
}

fs::path resolve_out_dir(const Context& ctx, const std::string& flag_value) {
  if (!ctx.ignore_env) {
    if (const char* env = std::getenv("ANONSIM_OUT_DIR"); env && *env) return fs::path(env);
  }
  if (flag_value.empty()) throw UsageError("an output directory is required (--out-dir or ANONSIM_OUT_DIR)");
  return fs::path(flag_value);
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

// Output bookkeeping for one command: canonical arguments, inputs, outputs, manifest.
class Run {
 public:
  Run(std::vector<std::string> command, fs::path out_dir, std::string manifest_name, std::string output_flag)
      : out_dir_(std::move(out_dir)), manifest_name_(std::move(manifest_name)) {
    manifest_.tool_version = ANONSIM_VERSION;
    manifest_.command = std::move(command);
    manifest_.output_flag = std::move(output_flag);
    fs::create_directories(out_dir_);
  }

  void arg(const std::string& flag, const std::string& value) {
    manifest_.command.push_back(flag);
    manifest_.command.push_back(value);
  }
  void flag(const std::string& flag) { manifest_.command.push_back(flag); }
  json& config() { return manifest_.config; }
  void seed(std::uint64_t s) { manifest_.seed = s; }

  fs::path input(const fs::path& path) {
    const auto abs = fs::absolute(path).lexically_normal();
    manifest_.inputs.push_back({abs.string(), sha256_file(abs)});
    return abs;
  }

  fs::path output(const std::string& name) {
    outputs_.push_back(name);
    return out_dir_ / name;
  }

  void write(const std::string& name, const std::string& content) {
    std::ofstream os(output(name), std::ios::binary);
    os << content;
    if (!os) throw DataError("cannot write " + (out_dir_ / name).string());
  }

  const fs::path& out_dir() const { return out_dir_; }

  void finish() {
    for (const auto& name : outputs_) manifest_.outputs.push_back({name, sha256_file(out_dir_ / name)});
    std::ofstream os(out_dir_ / manifest_name_, std::ios::binary);
    os << manifest_.to_json().dump(2) << '\n';
    if (!os) throw DataError("cannot write manifest");
  }

 private:
  fs::path out_dir_;
  std::string manifest_name_;
  RunManifest manifest_;
  std::vector<std::string> outputs_;
};

json quartiles_json(const Distribution& d) {
  if (d.empty()) return json{{"n", 0}};
  const auto q = d.quartiles();
  return json{{"n", d.size()}, {"q25", q.q25}, {"q50", q.q50}, {"q75", q.q75}, {"mean", d.mean()},
              {"min", d.min()}, {"max", d.max()}};
}

std::vector<BucketStrategy> parse_strategies(const std::vector<std::string>& tokens) {
  std::vector<BucketStrategy> out;
  for (const auto& t : tokens) {
    try {
      const auto s = BucketStrategy::parse(t);
      if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------- generate

struct GenerateOptions {
  std::uint32_t users = 0;
  double lambda = 0;
  Tick horizon = -1;
  Tick warmup = -1;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_generate(const Context& ctx, const GenerateOptions& o) {
  SimConfig c;
  c.users = o.users;
  c.lambda = o.lambda;
  c.reps = 1;
  c.seed = o.seed;
  c.warmup_ticks = o.warmup >= 0 ? o.warmup : default_warmup(o.lambda);
  c.validate();
  // Default: 200 measured epochs of 10 ticks.
  const Tick horizon = o.horizon >= 0 ? o.horizon : c.warmup_ticks + 2000;
  if (horizon < c.warmup_ticks) throw UsageError("--horizon must not precede the end of warm-up");

  fs::path out = o.out;
  if (!ctx.ignore_env) {
    if (const char* env = std::getenv("ANONSIM_OUT_DIR"); env && *env) out = fs::path(env) / out.filename();
  }
  if (out.filename().empty()) throw UsageError("--out must name a file");
  const auto dir = out.has_parent_path() ? out.parent_path() : fs::path(".");
  const auto name = out.filename().string();

  Run run({"generate"}, dir, name + ".manifest.json", "--out");
  run.arg("--users", std::to_string(c.users));
  run.arg("--lambda", num(c.lambda));
  run.arg("--horizon", std::to_string(horizon));
  run.arg("--warmup", std::to_string(c.warmup_ticks));
  run.arg("--seed", std::to_string(c.seed));
  run.seed(c.seed);
  run.config() = {{"users", c.users}, {"lambda", c.lambda}, {"horizon", horizon},
                  {"warmup", c.warmup_ticks}, {"seed", c.seed}, {"rng", "mt19937_64"},
                  {"value_model", {{"median", 84}, {"log_sigma", 2.4}}}, {"written", "measured payments only"}};

  StreamGenerator gen(c, Rng(rep_seed(c.seed, 0)));
  std::vector<Payment> buf;
  gen.advance_to(c.warmup_ticks, buf);
  std::ofstream os(run.output(name), std::ios::binary);
  write_payments_csv(os, {}, true);
  std::uint64_t written = 0;
  while (gen.now() < horizon) {
    buf.clear();
    gen.advance_to(std::min<Tick>(horizon, gen.now() + 64), buf);
    write_payments_csv(os, buf, false);
    written += buf.size();
  }
  os.close();
  if (!os) throw DataError("cannot write " + out.string());
  run.finish();
  ctx.out << "wrote " << written << " payments (ticks " << c.warmup_ticks << ".." << horizon << ") to "
          << out.string() << '\n';
  return kOk;
}

// ---------------------------------------------------------------- epoch-anon

struct EpochOptions {
  std::string in;
  std::uint32_t users = 0;
  std::vector<double> lambdas;
  int reps = 30;
  std::int64_t epochs = 100;
  std::uint64_t seed = 1;
  Tick warmup = -1;
  std::vector<Tick> epoch_ticks;
  std::vector<std::string> strategies{"none"};
  bool all_users = false;
  bool pay_more = false;
  Tick wait_cap = 0;
  std::uint64_t wait_payments = 1'000'000;
  std::string sample_unit = "set";
  std::string format = "csv";
  bool records = false;
  std::string time_map;
  unsigned threads = 0;
  std::string out_dir;
};

double time_map_payments_per_day(const std::string& name) {
  static const std::map<std::string, double> table{
      {"ethereum", 1.2e6}, {"bitcoin", 0.3e6}, {"germany", 99.6e6}, {"canada", 22.7e6}};
  const auto it = table.find(name);
  if (it == table.end()) throw UsageError("unknown --time-map '" + name + "' (ethereum | bitcoin | germany | canada)");
  return it->second;
}

std::string minutes_label(double seconds) {
  std::ostringstream os;
  if (seconds >= 60) {
    os << std::round(seconds / 6.0) / 10.0 << "min";
  } else {
    os << std::round(seconds * 10.0) / 10.0 << "s";
  }
  return os.str();
}

int cmd_epoch_anon(const Context& ctx, const EpochOptions& o) {
  const bool synthetic = o.in.empty();
  if (o.epoch_ticks.empty()) throw UsageError("--epoch-ticks is required");
  for (const Tick e : o.epoch_ticks) {
    if (e < 1) throw UsageError("--epoch-ticks values must be >= 1");
  }
  const auto strategies = parse_strategies(o.strategies);
  SampleUnit unit;
  try {
    unit = parse_sample_unit(o.sample_unit);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (synthetic && (o.users == 0 || o.lambdas.empty())) {
    throw UsageError("synthetic runs need --users and --lambda (or pass --in)");
  }
  if (!synthetic && o.all_users && o.users == 0) throw UsageError("--all-users with --in needs --users");
  if (synthetic && o.records) throw UsageError("--records requires --in");
  if (o.wait_cap < 0) throw UsageError("--wait-cap must be >= 1");
  double ppd = 0;
  if (!o.time_map.empty()) ppd = time_map_payments_per_day(o.time_map);

  Run run({"epoch-anon"}, resolve_out_dir(ctx, o.out_dir), "manifest.epoch-anon.json", "--out-dir");
  json& cfg = run.config();
  std::vector<Payment> input;
  if (!synthetic) {
    const auto path = run.input(o.in);
    auto in = open_input(path);
    input = read_payments_csv(in);
    run.arg("--in", path.string());
    cfg["input"] = path.string();
  } else {
    run.arg("--users", std::to_string(o.users));
    run.arg("--lambda", join_numbers(o.lambdas));
    run.arg("--reps", std::to_string(o.reps));
    run.arg("--epochs", std::to_string(o.epochs));
    run.arg("--seed", std::to_string(o.seed));
    if (o.warmup >= 0) run.arg("--warmup", std::to_string(o.warmup));
    run.seed(o.seed);
    cfg["users"] = o.users;
    cfg["lambda"] = o.lambdas;
    cfg["reps"] = o.reps;
    cfg["epochs_per_rep"] = o.epochs;
    cfg["seed"] = o.seed;
    cfg["warmup"] = o.warmup >= 0 ? json(o.warmup) : json("max(10*lambda, 500)");
  }
  if (!synthetic && o.users) run.arg("--users", std::to_string(o.users));
  run.arg("--epoch-ticks", join_numbers(o.epoch_ticks));
  std::vector<std::string> tokens;
  for (const auto& s : strategies) tokens.push_back(s.token());
  for (const auto& t : tokens) run.arg("--strategy", t);
  if (o.all_users) run.flag("--all-users");
  if (o.pay_more) run.flag("--pay-more");
  if (o.wait_cap > 0) {
    run.arg("--wait-cap", std::to_string(o.wait_cap));
    if (synthetic) run.arg("--wait-payments", std::to_string(o.wait_payments));
  }
  run.arg("--sample-unit", to_string(unit));
  run.arg("--format", o.format);
  if (o.records) run.flag("--records");
  if (!o.time_map.empty()) run.arg("--time-map", o.time_map);
  cfg["epoch_ticks"] = o.epoch_ticks;
  cfg["strategies"] = tokens;
  cfg["all_users"] = o.all_users;
  cfg["pay_more"] = o.pay_more;
  cfg["wait_cap"] = o.wait_cap;
  cfg["sample_unit"] = to_string(unit);
  cfg["time_map"] = o.time_map;

  EpochAnalysis analysis;
  analysis.strategies = strategies;
  analysis.all_users = o.all_users;
  analysis.users = o.users;
  analysis.pay_more = o.pay_more;
  analysis.unit = unit;

  EpochResults results(unit);
  std::vector<std::pair<std::string, PayMoreSummary>> pay_more;
  std::vector<EpochAnonRecord> records;
  std::vector<std::string> labels;

  auto label_for = [&](const std::string& prefix, double lambda, Tick epoch) {
    std::string label = prefix + "epoch" + std::to_string(epoch) + "t";
    if (ppd > 0) {
      SimConfig anchor;
      anchor.users = o.users ? o.users : 100000;
      anchor.lambda = synthetic ? 50.0 : lambda;
      label += "(" + minutes_label(static_cast<double>(epoch) * seconds_per_tick(anchor, ppd)) + ")";
    }
    return label;
  };

  if (synthetic) {
    for (const double lambda : o.lambdas) {
      for (const Tick epoch : o.epoch_ticks) {
        EpochExperiment ex;
        ex.config.users = o.users;
        ex.config.lambda = lambda;
        ex.config.epoch_len = epoch;
        ex.config.reps = o.reps;
        ex.config.seed = o.seed;
        ex.config.warmup_ticks = o.warmup >= 0 ? o.warmup : default_warmup(lambda);
        ex.epochs_per_rep = o.epochs;
        ex.analysis = analysis;
        ex.threads = o.threads;
        ex.label = label_for("lambda" + num(lambda) + "-", lambda, epoch);
        try {
          ex.config.validate();
        } catch (const std::invalid_argument& e) {
          throw UsageError(e.what());
        }
        const auto r = run_epoch_experiment(ex);
        results.summary.merge(r.summary);
        if (o.pay_more) pay_more.emplace_back(ex.label, r.pay_more);
        labels.push_back(ex.label);
      }
    }
  } else {
    for (const Tick epoch : o.epoch_ticks) {
      const auto label = label_for("input-", 50.0, epoch);
      const auto r = analyze_stream(input, epoch, analysis, label, o.records ? &records : nullptr);
      results.summary.merge(r.summary);
      if (o.pay_more) pay_more.emplace_back(label, r.pay_more);
      labels.push_back(label);
    }
  }

  const auto rows = results.summary.rows();
  std::ostringstream csv;
  write_summary_csv(csv, rows);
  run.write("summary.csv", csv.str());
  std::ostringstream js;
  write_summary_json(js, rows, unit);
  run.write("summary.json", js.str());
  std::ostringstream table;
  write_summary_table(table, rows);
  run.write("table.csv", table.str());

  std::vector<BoxPlot> plots;
  for (const auto& r : rows) {
    const auto* d = results.summary.distribution(r.config, r.metric);
    if (d && !d->empty()) plots.push_back(box_plot(r.config + "/" + r.metric, *d));
  }

  if (o.pay_more) {
    json pm = json::array();
    for (const auto& [label, s] : pay_more) {
      const auto& d = s.positive_costs;
      const std::uint64_t total = d.size() + s.zero_cost + s.no_match;
      json row{{"config", label},
               {"payments", total},
               {"zero_cost", s.zero_cost},
               {"no_match", s.no_match},
               {"positive", quartiles_json(d)},
               {"positive_below_half", d.empty() ? 0.0 : static_cast<double>(d.count_below(0.5)) /
                                                             static_cast<double>(d.size())}};
      if (!d.empty()) {
        const auto b = box_plot("pay-more/" + label, d);
        row["outliers"] = b.outlier_count;
        plots.push_back(b);
      }
      pm.push_back(row);
    }
    run.write("paymore.json", json{{"schema", "anonsim.paymore/1"}, {"configs", pm}}.dump(2) + "\n");
  }

  if (o.wait_cap > 0) {
    json wj = json::array();
    auto add_wait = [&](const std::string& label, std::span<const Payment> stream) {
      Distribution d;
      std::uint64_t at_cap = 0;
      for (const Tick w : wait_time_to_match(stream, o.wait_cap)) {
        d.add(static_cast<double>(w));
        at_cap += w == o.wait_cap ? 1 : 0;
      }
      json row{{"config", label}, {"cap", o.wait_cap}, {"payments", d.size()}, {"at_cap", at_cap},
               {"fraction_at_cap", d.empty() ? 0.0 : static_cast<double>(at_cap) / static_cast<double>(d.size())},
               {"waits", quartiles_json(d)}};
      if (!d.empty()) plots.push_back(box_plot("wait/" + label, d));
      wj.push_back(row);
    };
    if (synthetic) {
      for (const double lambda : o.lambdas) {
        SimConfig c;
        c.users = o.users;
        c.lambda = lambda;
        c.seed = o.seed;
        c.warmup_ticks = o.warmup >= 0 ? o.warmup : default_warmup(lambda);
        add_wait("lambda" + num(lambda), generate_measured(c, o.wait_payments));
      }
    } else {
      add_wait("input", input);
    }
    run.write("wait.json", json{{"schema", "anonsim.wait/1"}, {"configs", wj}}.dump(2) + "\n");
  }

  std::ostringstream box;
  write_box_plots(box, plots);
  run.write("boxplot.csv", box.str());
  if (o.records) {
    std::ostringstream rec;
    write_records_csv(rec, records);
    run.write("records.csv", rec.str());
  }
  run.finish();

  if (o.format == "json") {
    ctx.out << js.str();
  } else {
    ctx.out << table.str();
  }
  return kOk;
}

// ---------------------------------------------------------------- ripple

struct IngestOptions {
  std::string payments;
  std::string graph;
  double time_scale = 1000;
  double window_start = 0;
  double window_end = 0;
  bool has_start = false;
  bool has_end = false;
  std::string currency = "USD";
  std::string out_dir;
};

int cmd_ripple_ingest(const Context& ctx, const IngestOptions& o) {
  IngestConfig c;
  c.time_scale = o.time_scale;
  if (o.has_start) c.window_start = o.window_start;
  if (o.has_end) c.window_end = o.window_end;
  c.currency = o.currency;
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  Run run({"ripple", "ingest"}, resolve_out_dir(ctx, o.out_dir), "manifest.ingest.json", "--out-dir");
  const auto pay_path = run.input(o.payments);
  const auto graph_path = run.input(o.graph);
  run.arg("--payments", pay_path.string());
  run.arg("--graph", graph_path.string());
  run.arg("--time-scale", num(c.time_scale));
  if (c.window_start) run.arg("--window-start", num(*c.window_start));
  if (c.window_end) run.arg("--window-end", num(*c.window_end));
  run.arg("--currency", c.currency);
  run.config() = {{"time_scale", c.time_scale},
                  {"window_start", c.window_start ? json(*c.window_start) : json()},
                  {"window_end", c.window_end ? json(*c.window_end) : json()},
                  {"currency", c.currency}};

  auto pin = open_input(pay_path);
  auto gin = open_input(graph_path);
  const auto r = ingest(pin, gin, c);

  std::ostringstream pays;
  write_payments_csv(pays, r.payments);
  run.write("payments.csv", pays.str());
  std::ostringstream channels;
  write_channels_csv(channels, r.graph);
  run.write("channels.csv", channels.str());
  std::ostringstream updates;
  write_updates_csv(updates, r.graph);
  run.write("updates.csv", updates.str());
  run.write("ids.json", r.ids.to_json());
  const auto& s = r.stats;
  json stats{{"schema", "anonsim.ingest/1"},
             {"payment_rows", s.payment_rows},
             {"kept", s.kept},
             {"dropped_self", s.dropped_self},
             {"dropped_currency", s.dropped_currency},
             {"dropped_window", s.dropped_window},
             {"graph_rows", s.graph_rows},
             {"initial_channels", s.initial_channels},
             {"timed_updates", s.timed_updates},
             {"nodes", r.ids.size()},
             {"raw_payments_per_hour", s.raw_payments_per_hour},
             {"scaled_payments_per_minute", s.scaled_payments_per_minute},
             {"warnings", s.warnings}};
  run.write("ingest.json", stats.dump(2) + "\n");
  run.finish();
  for (const auto& w : s.warnings) ctx.err << "warning: " << w << '\n';
  ctx.out << "kept " << s.kept << " of " << s.payment_rows << " payments; " << r.ids.size() << " accounts, "
          << s.initial_channels << " channel directions, " << s.timed_updates << " timed updates\n";
  return kOk;
}

struct StageFile {
  const char* name;
  const char* stage;
};

fs::path require_artifact(const fs::path& work, const StageFile& f) {
  const auto p = work / f.name;
  if (!fs::exists(p)) {
    throw DataError(std::string("missing ") + f.name + " in " + work.string() + ": run the '" + f.stage +
                    "' stage first (anonsim ripple " + f.stage + ")");
  }
  return p;
}

constexpr StageFile kPayments{"payments.csv", "ingest"};
constexpr StageFile kChannels{"channels.csv", "ingest"};
constexpr StageFile kUpdates{"updates.csv", "ingest"};
constexpr StageFile kRoutes{"routes.csv", "route"};

struct StageOptions {
  std::string work_dir;
  std::string out_dir;
};

fs::path work_path(const std::string& work_dir) {
  if (work_dir.empty()) throw UsageError("--work-dir is required");
  return fs::absolute(work_dir).lexically_normal();
}

fs::path stage_out_dir(const Context& ctx, const StageOptions& o) {
  return resolve_out_dir(ctx, o.out_dir.empty() ? o.work_dir : o.out_dir);
}

std::vector<Payment> load_payments(Run& run, const fs::path& work) {
  auto in = open_input(run.input(require_artifact(work, kPayments)));
  return read_payments_csv(in);
}

std::vector<RoutedPayment> load_routes(Run& run, const fs::path& work, std::span<const Payment> payments) {
  auto in = open_input(run.input(require_artifact(work, kRoutes)));
  return read_routes_csv(in, payments);
}

int cmd_ripple_route(const Context& ctx, const StageOptions& o) {
  const auto work = work_path(o.work_dir);
  const auto channels_path = require_artifact(work, kChannels);
  const auto updates_path = require_artifact(work, kUpdates);
  Run run({"ripple", "route"}, stage_out_dir(ctx, o), "manifest.route.json", "--out-dir");
  run.arg("--work-dir", work.string());
  const auto payments = load_payments(run, work);
  auto cin = open_input(run.input(channels_path));
  auto uin = open_input(run.input(updates_path));
  std::size_t nodes = 0;
  for (const auto& p : payments) {
    nodes = std::max<std::size_t>(nodes, p.sender + 1);
    if (p.receiver) nodes = std::max<std::size_t>(nodes, *p.receiver + 1);
  }
  auto graph = read_graph_csv(cin, uin, nodes);

  RoutingStats stats;
  const auto routed = route_all(std::move(graph), payments, &stats);
  std::ostringstream routes;
  write_routes_csv(routes, routed);
  run.write("routes.csv", routes.str());
  json sj{{"schema", "anonsim.routing/1"},
          {"attempted", stats.attempted},
          {"succeeded", stats.succeeded},
          {"multi_hop", stats.multi_hop},
          {"mean_intermediates", stats.mean_intermediates},
          {"max_intermediates", stats.max_intermediates},
          {"failures_no_path", stats.failures_no_path},
          {"failures_unknown", stats.failures_unknown}};
  run.write("routing.json", sj.dump(2) + "\n");
  run.finish();
  ctx.out << "routed " << stats.succeeded << " of " << stats.attempted << " payments; " << stats.multi_hop
          << " multi-hop, mean intermediates " << num(stats.mean_intermediates) << ", max "
          << stats.max_intermediates << '\n';
  return kOk;
}

struct AnonOptions {
  StageOptions stage;
  Tick hop_ticks = 1;
  Tick epoch_ticks = 0;
  bool allow_loops = false;
  std::string strategy;
  std::string sample_unit = "set";
  std::string format = "csv";
};

int cmd_ripple_anon(const Context& ctx, const AnonOptions& o) {
  if (o.hop_ticks < 1) throw UsageError("--hop-ticks must be >= 1");
  if (o.epoch_ticks < 0) throw UsageError("--epoch-ticks must be >= 1");
  std::optional<BucketStrategy> strategy;
  if (!o.strategy.empty()) strategy = parse_strategies({o.strategy}).front();
  SampleUnit unit;
  try {
    unit = parse_sample_unit(o.sample_unit);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto work = work_path(o.stage.work_dir);
  require_artifact(work, kPayments);
  require_artifact(work, kRoutes);
  Run run({"ripple", "anon"}, stage_out_dir(ctx, o.stage), "manifest.anon.json", "--out-dir");
  run.arg("--work-dir", work.string());
  run.arg("--hop-ticks", std::to_string(o.hop_ticks));
  if (o.epoch_ticks) run.arg("--epoch-ticks", std::to_string(o.epoch_ticks));
  if (o.allow_loops) run.flag("--allow-loops");
  if (strategy) run.arg("--strategy", strategy->token());
  run.arg("--sample-unit", to_string(unit));
  run.arg("--format", o.format);
  run.config() = {{"hop_ticks", o.hop_ticks},
                  {"epoch_ticks", o.epoch_ticks},
                  {"allow_loops", o.allow_loops},
                  {"strategy", strategy ? json(strategy->token()) : json()},
                  {"sample_unit", to_string(unit)}};

  const auto payments = load_payments(run, work);
  const auto routed = load_routes(run, work, payments);

  const std::string config = "hop" + std::to_string(o.hop_ticks) + "t" + (o.allow_loops ? "+loops" : "");
  SummaryAccumulator path_acc(SampleUnit::payment);
  std::vector<BoxPlot> plots;
  auto add_metric = [&](const std::string& metric, const std::vector<std::int64_t>& sizes) {
    const std::vector<std::int64_t> ones(sizes.size(), 1);
    path_acc.add_epoch(config, metric, sizes, ones);
  };
  const auto base = path_anon(routed, o.hop_ticks, {o.allow_loops, std::nullopt});
  std::vector<std::int64_t> mins;
  std::vector<std::int64_t> maxs;
  for (const auto& r : base) {
    mins.push_back(r.min_size);
    maxs.push_back(r.max_size);
  }
  add_metric("path-min", mins);
  add_metric("path-max", maxs);
  std::ostringstream rec;
  write_path_records_csv(rec, base);
  run.write("path_records.csv", rec.str());
  if (strategy) {
    const auto valued = path_anon(routed, o.hop_ticks, {o.allow_loops, strategy});
    mins.clear();
    maxs.clear();
    for (const auto& r : valued) {
      mins.push_back(r.min_size);
      maxs.push_back(r.max_size);
    }
    add_metric("value+path-min:" + strategy->token(), mins);
    add_metric("value+path-max:" + strategy->token(), maxs);
    std::ostringstream vrec;
    write_path_records_csv(vrec, valued);
    run.write("value_path_records.csv", vrec.str());
  }
  const auto path_rows = path_acc.rows();
  for (const auto& r : path_rows) {
    const auto* d = path_acc.distribution(r.config, r.metric);
    if (d && !d->empty()) plots.push_back(box_plot(r.config + "/" + r.metric, *d));
  }
  std::ostringstream pcsv;
  write_summary_csv(pcsv, path_rows);
  run.write("path_summary.csv", pcsv.str());
  std::ostringstream pjs;
  write_summary_json(pjs, path_rows, SampleUnit::payment);
  run.write("path_summary.json", pjs.str());

  if (o.epoch_ticks > 0) {
    // Epoch metrics over the successfully routed payments, for side-by-side comparison.
    std::vector<Payment> delivered;
    for (const auto& r : routed) delivered.push_back(r.payment);
    EpochAnalysis a;
    a.strategies = {BucketStrategy::identity()};
    if (strategy && !(*strategy == BucketStrategy::identity())) a.strategies.push_back(*strategy);
    a.unit = unit;
    const auto label = "epoch" + std::to_string(o.epoch_ticks) + "t";
    const auto er = analyze_stream(delivered, o.epoch_ticks, a, label);
    const auto erows = er.summary.rows();
    for (const auto& r : erows) {
      const auto* d = er.summary.distribution(r.config, r.metric);
      if (d && !d->empty()) plots.push_back(box_plot(r.config + "/" + r.metric, *d));
    }
    std::ostringstream ecsv;
    write_summary_csv(ecsv, erows);
    run.write("epoch_summary.csv", ecsv.str());
    std::ostringstream ejs;
    write_summary_json(ejs, erows, unit);
    run.write("epoch_summary.json", ejs.str());
  }
  std::ostringstream box;
  write_box_plots(box, plots);
  run.write("anon_boxplot.csv", box.str());
  run.finish();
  if (o.format == "json") {
    ctx.out << pjs.str();
  } else {
    ctx.out << pcsv.str();
  }
  return kOk;
}

std::vector<Tick> checked_hops(const std::vector<Tick>& hops) {
  if (hops.empty()) throw UsageError("--hop-ticks needs at least one value");
  for (const Tick h : hops) {
    if (h < 1) throw UsageError("--hop-ticks values must be >= 1");
  }
  return hops;
}

struct CoverOptions {
  StageOptions stage;
  std::vector<Tick> hop_ticks{1};
  std::string mode = "both";
};

int cmd_ripple_cover(const Context& ctx, const CoverOptions& o) {
  const auto hops = checked_hops(o.hop_ticks);
  std::vector<CoverMode> modes;
  if (o.mode == "both") {
    modes = {CoverMode::any_intermediate, CoverMode::mixing_only};
  } else {
    try {
      modes = {parse_cover_mode(o.mode)};
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  const auto work = work_path(o.stage.work_dir);
  require_artifact(work, kPayments);
  require_artifact(work, kRoutes);
  Run run({"ripple", "cover"}, stage_out_dir(ctx, o.stage), "manifest.cover.json", "--out-dir");
  run.arg("--work-dir", work.string());
  run.arg("--hop-ticks", join_numbers(hops));
  run.arg("--mode", o.mode);
  run.config() = {{"hop_ticks", hops}, {"mode", o.mode}};
  const auto payments = load_payments(run, work);
  const auto routed = load_routes(run, work, payments);

  json results = json::array();
  for (const Tick h : hops) {
    const auto events = build_mixing(routed, h);
    for (const auto mode : modes) {
      const auto c = honest_cover(routed, events, mode);
      results.push_back({{"hop_ticks", h},
                         {"mode", to_string(mode)},
                         {"size", c.nodes.size()},
                         {"nodes", c.nodes},
                         {"multi_hop_paths", c.multi_hop_paths},
                         {"uncovered", c.uncovered.size()},
                         {"worst_case_nodes", c.worst_case_nodes}});
      ctx.out << "hop " << h << "t " << to_string(mode) << ": " << c.nodes.size() << " honest nodes cover "
              << c.multi_hop_paths - c.uncovered.size() << " of " << c.multi_hop_paths
              << " multi-hop paths; " << c.worst_case_nodes << " worst-case witness nodes\n";
    }
  }
  run.write("cover.json", json{{"schema", "anonsim.cover/1"}, {"results", results}}.dump(2) + "\n");
  run.finish();
  return kOk;
}

struct SweepOptions {
  StageOptions stage;
  std::vector<Tick> hop_ticks{1, 2, 4, 8};
  std::string strategy;
  bool multi_hop_only = false;
};

json metric_json(const Distribution& d) {
  json j = quartiles_json(d);
  j["deanon_count"] = d.count_equal(1.0);
  return j;
}

int cmd_ripple_sweep(const Context& ctx, const SweepOptions& o) {
  const auto hops = checked_hops(o.hop_ticks);
  const Tick base = *std::min_element(hops.begin(), hops.end());
  for (const Tick h : hops) {
    if (h % base != 0) throw UsageError("--hop-ticks must all be multiples of the smallest value");
  }
  std::optional<BucketStrategy> strategy;
  if (!o.strategy.empty()) strategy = parse_strategies({o.strategy}).front();
  const auto work = work_path(o.stage.work_dir);
  require_artifact(work, kPayments);
  require_artifact(work, kRoutes);
  Run run({"ripple", "sweep"}, stage_out_dir(ctx, o.stage), "manifest.sweep.json", "--out-dir");
  run.arg("--work-dir", work.string());
  run.arg("--hop-ticks", join_numbers(hops));
  if (strategy) run.arg("--strategy", strategy->token());
  if (o.multi_hop_only) run.flag("--multi-hop-only");
  run.config() = {{"hop_ticks", hops},
                  {"strategy", strategy ? json(strategy->token()) : json()},
                  {"multi_hop_only", o.multi_hop_only}};
  const auto payments = load_payments(run, work);
  const auto routed = load_routes(run, work, payments);

  const auto points = hop_time_sweep(routed, hops, strategy, o.multi_hop_only);
  const std::string prefix = strategy ? "value+" : "";
  const std::string suffix = strategy ? ":" + strategy->token() : "";
  json arr = json::array();
  std::vector<BoxPlot> plots;
  for (const auto& p : points) {
    json metrics;
    const std::pair<std::string, const Distribution*> named[] = {{prefix + "path-min" + suffix, &p.min},
                                                                 {prefix + "path-max" + suffix, &p.max},
                                                                 {prefix + "path-max+loops" + suffix, &p.max_loops}};
    for (const auto& [name, dist] : named) {
      metrics[name] = metric_json(*dist);
      if (!dist->empty()) plots.push_back(box_plot("hop" + std::to_string(p.hop_time) + "t/" + name, *dist));
    }
    arr.push_back({{"hop_ticks", p.hop_time}, {"metrics", metrics}});
    if (!p.max.empty()) {
      ctx.out << "hop " << p.hop_time << "t: min median " << num(p.min.quartiles().q50) << ", max median "
              << num(p.max.quartiles().q50) << ", mean min " << num(p.min.mean()) << '\n';
    }
  }
  run.write("sweep.json", json{{"schema", "anonsim.sweep/1"}, {"hop_times", arr}}.dump(2) + "\n");
  std::ostringstream box;
  write_box_plots(box, plots);
  run.write("sweep_boxplot.csv", box.str());
  run.finish();
  return kOk;
}

// ---------------------------------------------------------------- rerun

int dispatch(const std::vector<std::string>& args, Context ctx);

int cmd_rerun(const Context& ctx, const std::string& manifest_path, const std::string& out_dir) {
  std::ifstream in(manifest_path);
  if (!in) throw DataError("cannot open manifest " + manifest_path);
  RunManifest m;
  try {
    m = RunManifest::from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed manifest: ") + e.what());
  }
  if (out_dir.empty()) throw UsageError("rerun needs --out-dir");
  for (const auto& a : m.inputs) {
    if (sha256_file(a.path) != a.sha256) throw DataError("input changed since the recorded run: " + a.path);
  }
  auto args = m.command;
  args.push_back(m.output_flag);
  if (m.output_flag == "--out") {
    if (m.outputs.empty()) throw DataError("manifest lists no outputs");
    args.push_back((fs::path(out_dir) / m.outputs.front().path).string());
  } else {
    args.push_back(out_dir);
  }
  std::ostringstream quiet;
  Context inner{quiet, ctx.err, true};
  const int code = dispatch(args, inner);
  if (code != kOk) return code;
  std::size_t same = 0;
  for (const auto& a : m.outputs) {
    const auto p = fs::path(out_dir) / a.path;
    if (fs::exists(p) && sha256_file(p) == a.sha256) {
      ++same;
    } else {
      ctx.err << "differs: " << a.path << '\n';
    }
  }
  if (same != m.outputs.size()) {
    ctx.err << "rerun produced " << m.outputs.size() - same << " differing outputs\n";
    return kDataError;
  }
  ctx.out << "rerun reproduced " << same << " outputs byte for byte\n";
  return kOk;
}

// ---------------------------------------------------------------- wiring

int dispatch(const std::vector<std::string>& args, Context ctx) {
  CLI::App app{"Anonymity-set simulator for payment networks", "anonsim"};
  app.set_version_flag("--version", ANONSIM_VERSION);
  app.require_subcommand(1);

  GenerateOptions gen;
  auto* g = app.add_subcommand("generate", "Generate a synthetic payment stream");
  g->add_option("--users", gen.users, "Number of users")->required()->check(CLI::PositiveNumber);
  g->add_option("--lambda", gen.lambda, "Mean ticks between two sends of one user")->required()->check(CLI::Range(1.0, 1e9));
  g->add_option("--horizon", gen.horizon, "Last tick (exclusive); default warm-up + 2000");
  g->add_option("--warmup", gen.warmup, "Warm-up ticks; default max(10*lambda, 500)");
  g->add_option("--seed", gen.seed, "RNG seed");
  g->add_option("--out", gen.out, "Output CSV")->required();

  EpochOptions ep;
  auto* e = app.add_subcommand("epoch-anon", "Epoch-based anonymity sets (synthetic or from a CSV)");
  e->add_option("--in", ep.in, "Payments CSV instead of synthetic generation");
  e->add_option("--users", ep.users, "Number of users")->check(CLI::PositiveNumber);
  e->add_option("--lambda", ep.lambdas, "Sending frequencies")->delimiter(',')->check(CLI::Range(1.0, 1e9));
  e->add_option("--reps", ep.reps, "Repetitions")->check(CLI::PositiveNumber);
  e->add_option("--epochs", ep.epochs, "Measured epochs per repetition")->check(CLI::PositiveNumber);
  e->add_option("--seed", ep.seed, "RNG seed");
  e->add_option("--warmup", ep.warmup, "Warm-up ticks");
  e->add_option("--epoch-ticks", ep.epoch_ticks, "Epoch lengths in ticks")->delimiter(',')->required();
  e->add_option("--strategy", ep.strategies, "none | fixed:<k> | scaled-cheap | scaled-exp (repeatable)")
      ->delimiter(',');
  e->add_flag("--all-users", ep.all_users, "Also report the all-users metric");
  e->add_flag("--pay-more", ep.pay_more, "Analyze the pay-more strategy");
  e->add_option("--wait-cap", ep.wait_cap, "Analyze the wait-longer strategy with this cap (ticks)")
      ->check(CLI::PositiveNumber);
  e->add_option("--wait-payments", ep.wait_payments, "Measured payments per lambda for wait-longer")
      ->check(CLI::PositiveNumber);
  e->add_option("--sample-unit", ep.sample_unit, "Quartile samples: set | payment");
  e->add_option("--format", ep.format, "Printed report format")->check(CLI::IsMember({"csv", "json"}));
  e->add_flag("--records", ep.records, "Write per-payment records (with --in)");
  e->add_option("--time-map", ep.time_map, "Label epochs in real time: ethereum | bitcoin | germany | canada");
  e->add_option("--threads", ep.threads, "Worker threads (0 = all cores)");
  e->add_option("--out-dir", ep.out_dir, "Output directory");

  auto* r = app.add_subcommand("ripple", "Staged pipeline over a credit-network dataset");
  r->require_subcommand(1);
  IngestOptions ing;
  auto* ri = r->add_subcommand("ingest", "Normalize payments and capacities");
  ri->add_option("--payments", ing.payments, "Payments CSV (time,sender,receiver,value[,currency])")->required();
  ri->add_option("--graph", ing.graph, "Capacity CSV (time,src,dst,capacity)")->required();
  ri->add_option("--time-scale", ing.time_scale, "Raw seconds per tick");
  auto* ws = ri->add_option("--window-start", ing.window_start, "Window start (raw time)");
  auto* we = ri->add_option("--window-end", ing.window_end, "Window end (raw time, exclusive)");
  ri->add_option("--currency", ing.currency, "Currency to keep");
  ri->add_option("--out-dir", ing.out_dir, "Work directory");

  StageOptions route;
  auto* rr = r->add_subcommand("route", "Route ingested payments");
  rr->add_option("--work-dir", route.work_dir, "Work directory")->required();
  rr->add_option("--out-dir", route.out_dir, "Output directory (default: work directory)");

  AnonOptions an;
  auto* ra = r->add_subcommand("anon", "Path-based anonymity sets");
  ra->add_option("--work-dir", an.stage.work_dir, "Work directory")->required();
  ra->add_option("--out-dir", an.stage.out_dir, "Output directory (default: work directory)");
  ra->add_option("--hop-ticks", an.hop_ticks, "Hop time in ticks");
  ra->add_option("--epoch-ticks", an.epoch_ticks, "Also report epoch metrics with this epoch length");
  ra->add_flag("--allow-loops", an.allow_loops, "Accept splices that repeat a node");
  ra->add_option("--strategy", an.strategy, "Intersect with value buckets");
  ra->add_option("--sample-unit", an.sample_unit, "Quartile samples for epoch metrics: set | payment");
  ra->add_option("--format", an.format, "Printed report format")->check(CLI::IsMember({"csv", "json"}));

  CoverOptions cov;
  auto* rc = r->add_subcommand("cover", "Greedy honest-node cover");
  rc->add_option("--work-dir", cov.stage.work_dir, "Work directory")->required();
  rc->add_option("--out-dir", cov.stage.out_dir, "Output directory (default: work directory)");
  rc->add_option("--hop-ticks", cov.hop_ticks, "Hop times in ticks")->delimiter(',');
  rc->add_option("--mode", cov.mode, "any | mixing | both");

  SweepOptions sw;
  auto* rs = r->add_subcommand("sweep", "Path anonymity across hop times");
  rs->add_option("--work-dir", sw.stage.work_dir, "Work directory")->required();
  rs->add_option("--out-dir", sw.stage.out_dir, "Output directory (default: work directory)");
  rs->add_option("--hop-ticks", sw.hop_ticks, "Hop times in ticks")->delimiter(',');
  rs->add_option("--strategy", sw.strategy, "Intersect with value buckets");
  rs->add_flag("--multi-hop-only", sw.multi_hop_only, "Only payments with intermediates");

  std::string manifest;
  std::string rerun_out;
  auto* re = app.add_subcommand("rerun", "Repeat a run from its manifest and compare outputs");
  re->add_option("manifest", manifest, "Manifest JSON")->required();
  re->add_option("--out-dir", rerun_out, "Where to write the repeated outputs")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, ctx.out, ctx.err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, ctx.out, ctx.err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, ctx.out, ctx.err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, ctx.out, ctx.err);
    return kUsage;
  }

  try {
    if (g->parsed()) return cmd_generate(ctx, gen);
    if (e->parsed()) return cmd_epoch_anon(ctx, ep);
    if (ri->parsed()) {
      ing.has_start = ws->count() > 0;
      ing.has_end = we->count() > 0;
      return cmd_ripple_ingest(ctx, ing);
    }
    if (rr->parsed()) return cmd_ripple_route(ctx, route);
    if (ra->parsed()) return cmd_ripple_anon(ctx, an);
    if (rc->parsed()) return cmd_ripple_cover(ctx, cov);
    if (rs->parsed()) return cmd_ripple_sweep(ctx, sw);
    if (re->parsed()) return cmd_rerun(ctx, manifest, rerun_out);
  } catch (const UsageError& ex) {
    ctx.err << "error: " << ex.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& ex) {
    ctx.err << "error: " << ex.what() << '\n';
    return kUsage;
  } catch (const DataError& ex) {
    ctx.err << "error: " << ex.what() << '\n';
    return kDataError;
  } catch (const fs::filesystem_error& ex) {
    ctx.err << "error: " << ex.what() << '\n';
    return kDataError;
  }
  return kUsage;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  return dispatch(args, Context{out, err, false});
}

}  // namespace anonsim::cli
