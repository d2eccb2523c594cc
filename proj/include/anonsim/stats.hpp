#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace anonsim {

struct Quartiles {
  double q25 = 0;
  double q50 = 0;
  double q75 = 0;
};

// Sorted sample kept as value -> multiplicity. Quantiles use linear
// interpolation between closest ranks at position (n - 1) * p.
class Distribution {
 public:
  Distribution() = default;
  explicit Distribution(std::span<const double> sample);

  void add(double value, std::uint64_t count = 1);
  void merge(const Distribution& other);

  std::uint64_t size() const { return n_; }
  bool empty() const { return n_ == 0; }
  double min() const;
  double max() const;
  double mean() const;
  double sum() const { return sum_; }

  // Throws std::invalid_argument on an empty distribution or p outside [0, 1].
  double quantile(double p) const;
  Quartiles quartiles() const;

  std::uint64_t count_equal(double value) const;
  std::uint64_t count_below(double value) const;
  std::uint64_t count_above(double value) const;

  // Element at 0-based rank in ascending order.
  double at_rank(std::uint64_t rank) const;

  const std::map<double, std::uint64_t>& runs() const { return runs_; }

 private:
  std::map<double, std::uint64_t> runs_;
  std::uint64_t n_ = 0;
  double sum_ = 0;
};

Quartiles quartiles(std::span<const double> sample);

// Box-plot series with whiskers at the most extreme samples within 1.5 IQR.
struct BoxPlot {
  std::string label;
  Quartiles q;
  double whisker_lo = 0;
  double whisker_hi = 0;
  std::uint64_t outlier_count = 0;
};

BoxPlot box_plot(const std::string& label, const Distribution& dist);

// One anonymity set observed in one epoch: its size (distinct senders) and the
// number of payments it covers.
struct SetRecord {
  std::string config;
  std::string metric;
  std::int64_t epoch = 0;
  std::int64_t set_size = 1;
  std::int64_t payments = 1;
};

// Whether quartiles pool one sample per anonymity set or one per payment.
enum class SampleUnit { set, payment };

const char* to_string(SampleUnit unit);
SampleUnit parse_sample_unit(const std::string& token);

struct SummaryRow {
  std::string config;
  std::string metric;
  Quartiles q;
  double mean = 0;
  // Mean number of payments with set size 1 per epoch.
  double deanon_count = 0;
  std::uint64_t samples = 0;
  std::uint64_t epochs = 0;
};

// Streaming aggregation keyed by (config, metric). Rows come out in first-seen
// key order so merges by repetition index stay deterministic.
class SummaryAccumulator {
 public:
  explicit SummaryAccumulator(SampleUnit unit = SampleUnit::set) : unit_(unit) {}

  // One epoch worth of sets for a (config, metric) pair.
  void add_epoch(const std::string& config, const std::string& metric,
                 std::span<const std::int64_t> set_sizes,
                 std::span<const std::int64_t> set_payments);
  void merge(const SummaryAccumulator& other);

  std::vector<SummaryRow> rows() const;
  const Distribution* distribution(const std::string& config, const std::string& metric) const;
  SampleUnit unit() const { return unit_; }

 private:
  struct Entry {
    std::string config;
    std::string metric;
    Distribution dist;
    std::uint64_t epochs = 0;
    std::uint64_t deanon = 0;
  };
  Entry& entry(const std::string& config, const std::string& metric);

  SampleUnit unit_;
  std::vector<Entry> entries_;
};

// Groups set records by (config, metric, epoch) and summarizes them.
std::vector<SummaryRow> summarize(std::span<const SetRecord> records, SampleUnit unit = SampleUnit::set);

inline constexpr const char* kSummarySchema = "anonsim.summary/1";

void write_summary_csv(std::ostream& os, std::span<const SummaryRow> rows);
void write_summary_json(std::ostream& os, std::span<const SummaryRow> rows, SampleUnit unit);
// Metrics as rows, configs as columns, cells "q25 q50 q75".
void write_summary_table(std::ostream& os, std::span<const SummaryRow> rows);
void write_box_plots(std::ostream& os, std::span<const BoxPlot> plots);

// Shortest round-trip decimal for reports.
std::string format_number(double v);

}  // namespace anonsim
