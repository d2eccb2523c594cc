#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "anonsim/buckets.hpp"
#include "anonsim/epoch_anon.hpp"
#include "anonsim/experiment.hpp"
#include "anonsim/path_anon.hpp"
#include "anonsim/stats.hpp"
#include "anonsim/synthgen.hpp"

namespace py = pybind11;
using namespace anonsim;

namespace {

SimConfig make_config(std::uint32_t users, double lambda, std::uint64_t seed, std::optional<Tick> warmup) {
  SimConfig c;
  c.users = users;
  c.lambda = lambda;
  c.seed = seed;
  c.reps = 1;
  c.warmup_ticks = warmup ? *warmup : default_warmup(lambda);
  c.validate();
  return c;
}

std::vector<RoutedPayment> zip_routes(const std::vector<Payment>& payments,
                                      const std::vector<std::vector<NodeId>>& paths) {
  if (payments.size() != paths.size()) throw std::invalid_argument("payments and paths differ in length");
  std::vector<RoutedPayment> out(payments.size());
  for (std::size_t i = 0; i < payments.size(); ++i) {
    if (paths[i].size() < 2) throw std::invalid_argument("a path needs at least two nodes");
    out[i] = {payments[i], paths[i]};
  }
  return out;
}

py::dict row_dict(const SummaryRow& r) {
  py::dict d;
  d["config"] = r.config;
  d["metric"] = r.metric;
  d["q25"] = r.q.q25;
  d["q50"] = r.q.q50;
  d["q75"] = r.q.q75;
  d["mean"] = r.mean;
  d["deanon_count"] = r.deanon_count;
  d["samples"] = r.samples;
  d["epochs"] = r.epochs;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Anonymity-set simulation core";

  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);

  m.def("bucket_fixed", &bucket_fixed, py::arg("value"), py::arg("step"));
  m.def("bucket_cheap", &bucket_cheap, py::arg("value"));
  m.def("bucket_expensive", &bucket_expensive, py::arg("value"));
  m.def("relative_cost", &relative_cost, py::arg("original"), py::arg("bucketed"));

  py::class_<BucketStrategy>(m, "BucketStrategy")
      .def(py::init([](const std::string& token) { return BucketStrategy::parse(token); }), py::arg("token") = "none")
      .def("apply", &BucketStrategy::apply)
      .def_property_readonly("token", &BucketStrategy::token)
      .def("__eq__", [](const BucketStrategy& a, const BucketStrategy& b) { return a == b; })
      .def("__repr__", [](const BucketStrategy& s) { return "BucketStrategy('" + s.token() + "')"; });

  py::class_<Payment>(m, "Payment")
      .def(py::init([](PaymentId id, UserId sender, std::optional<UserId> receiver, Usd value, Tick time) {
             Payment p;
             p.id = id;
             p.sender = sender;
             p.receiver = receiver;
             p.value = value;
             p.time = time;
             return p;
           }),
           py::arg("id"), py::arg("sender"), py::arg("receiver") = std::nullopt, py::arg("value") = 1,
           py::arg("time") = 0)
      .def_readwrite("id", &Payment::id)
      .def_readwrite("sender", &Payment::sender)
      .def_readwrite("receiver", &Payment::receiver)
      .def_readwrite("value", &Payment::value)
      .def_readwrite("time", &Payment::time)
      .def_readwrite("warmup", &Payment::warmup)
      .def("__eq__", [](const Payment& a, const Payment& b) { return a == b; })
      .def("__repr__", [](const Payment& p) {
        return "Payment(id=" + std::to_string(p.id) + ", sender=" + std::to_string(p.sender) +
               ", value=" + std::to_string(p.value) + ", time=" + std::to_string(p.time) + ")";
      });

  m.def(
      "generate",
      [](std::uint32_t users, double lambda, Tick horizon, std::uint64_t seed, std::optional<Tick> warmup) {
        const auto c = make_config(users, lambda, seed, warmup);
        return generate_stream(c, horizon, Rng(rep_seed(seed, 0)));
      },
      py::arg("users"), py::arg("lam"), py::arg("horizon"), py::arg("seed") = 1, py::arg("warmup") = std::nullopt,
      "Payments from tick 0 up to horizon, warm-up included (flagged).");
  m.def(
      "generate_measured",
      [](std::uint32_t users, double lambda, std::uint64_t count, std::uint64_t seed, int rep) {
        return generate_measured(make_config(users, lambda, seed, std::nullopt), count, rep);
      },
      py::arg("users"), py::arg("lam"), py::arg("count"), py::arg("seed") = 1, py::arg("rep") = 0);

  m.def("read_payments_csv", [](const std::string& text) {
    std::istringstream in(text);
    return read_payments_csv(in);
  });
  m.def("write_payments_csv", [](const std::vector<Payment>& payments) {
    std::ostringstream os;
    write_payments_csv(os, payments);
    return os.str();
  });

  m.def("active_sets", [](const std::vector<Payment>& epoch) { return anon_active(epoch).per_payment; });
  m.def(
      "active_value_sets",
      [](const std::vector<Payment>& epoch, const BucketStrategy& s) { return anon_active_value(epoch, s).per_payment; },
      py::arg("epoch"), py::arg("strategy") = BucketStrategy::identity());
  m.def("pay_more", [](const std::vector<Payment>& epoch) { return pay_more(epoch); });
  m.def("wait_time_to_match", [](const std::vector<Payment>& stream, Tick cap) { return wait_time_to_match(stream, cap); },
        py::arg("stream"), py::arg("cap") = 1200);
  m.def("quartiles", [](const std::vector<double>& sample) {
    const auto q = quartiles(sample);
    return py::make_tuple(q.q25, q.q50, q.q75);
  });

  m.def(
      "epoch_experiment",
      [](std::uint32_t users, double lambda, Tick epoch_ticks, int reps, std::int64_t epochs, std::uint64_t seed,
         const std::vector<std::string>& strategies, const std::string& sample_unit, unsigned threads) {
        EpochExperiment ex;
        ex.config = make_config(users, lambda, seed, std::nullopt);
        ex.config.epoch_len = epoch_ticks;
        ex.config.reps = reps;
        ex.epochs_per_rep = epochs;
        ex.analysis.strategies.clear();
        for (const auto& t : strategies) ex.analysis.strategies.push_back(BucketStrategy::parse(t));
        ex.analysis.unit = parse_sample_unit(sample_unit);
        ex.threads = threads;
        ex.label = "lambda" + format_number(lambda) + "-epoch" + std::to_string(epoch_ticks) + "t";
        EpochResults r(ex.analysis.unit);
        {
          py::gil_scoped_release release;
          r = run_epoch_experiment(ex);
        }
        py::list rows;
        for (const auto& row : r.summary.rows()) rows.append(row_dict(row));
        return rows;
      },
      py::arg("users"), py::arg("lam"), py::arg("epoch_ticks"), py::arg("reps") = 30, py::arg("epochs") = 100,
      py::arg("seed") = 1, py::arg("strategies") = std::vector<std::string>{"none"},
      py::arg("sample_unit") = "set", py::arg("threads") = 0);

  m.def(
      "path_anon",
      [](const std::vector<Payment>& payments, const std::vector<std::vector<NodeId>>& paths, Tick hop_ticks,
         bool allow_loops, std::optional<std::string> strategy) {
        PathAnonOptions o;
        o.allow_loops = allow_loops;
        if (strategy) o.value_filter = BucketStrategy::parse(*strategy);
        py::list out;
        for (const auto& r : path_anon(zip_routes(payments, paths), hop_ticks, o)) {
          out.append(py::make_tuple(r.min_size, r.max_size));
        }
        return out;
      },
      py::arg("payments"), py::arg("paths"), py::arg("hop_ticks") = 1, py::arg("allow_loops") = false,
      py::arg("strategy") = std::nullopt, "(min, max) path anonymity set sizes per payment.");
}
