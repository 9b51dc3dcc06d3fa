#include "rlcm/calib.hpp"

#include <algorithm>
#include <cmath>

#include "rlcm/errors.hpp"

namespace rlcm::calib {

ReliabilityTable reliability_bins(std::span<const ConfidencePair> pairs, int num_bins) {
  if (num_bins < 1) throw ValidationError("bins", "must be >= 1");
  ReliabilityTable table;
  table.bins.resize(num_bins);
  std::vector<double> conf_sum(num_bins, 0.0);
  std::vector<int> correct_sum(num_bins, 0);
  for (int b = 0; b < num_bins; ++b) {
    table.bins[b].lo = static_cast<double>(b) / num_bins;
    table.bins[b].hi = static_cast<double>(b + 1) / num_bins;
  }
  for (const ConfidencePair& p : pairs) {
    if (!(p.confidence >= 0.0 && p.confidence <= 1.0))
      throw ValidationError("confidence", "out of [0,1]");
    // [(i-1)/B, i/B) with the last bin closed at 1
    int b = std::min(num_bins - 1, static_cast<int>(p.confidence * num_bins));
    ++table.bins[b].count;
    conf_sum[b] += p.confidence;
    correct_sum[b] += p.correct ? 1 : 0;
  }
  table.total = static_cast<int>(pairs.size());
  for (int b = 0; b < num_bins; ++b) {
    if (table.bins[b].count > 0) {
      table.bins[b].mean_conf = conf_sum[b] / table.bins[b].count;
      table.bins[b].accuracy = static_cast<double>(correct_sum[b]) / table.bins[b].count;
    }
  }
  return table;
}

CalibrationErrors calibration_errors(const ReliabilityTable& table) {
  if (table.total < 1) throw ValidationError("table", "empty reliability table");
  CalibrationErrors out;
  for (const ReliabilityBin& b : table.bins) {
    if (b.count == 0) continue;
    const double w = static_cast<double>(b.count) / table.total;
    const double gap = std::abs(b.accuracy - b.mean_conf);
    out.ece += w * gap;
    if (b.mean_conf > b.accuracy) out.pce += w * gap;
  }
  return out;
}

double brier_score(std::span<const ConfidencePair> pairs) {
  if (pairs.empty()) throw ValidationError("pairs", "empty input");
  double acc = 0.0;
  for (const ConfidencePair& p : pairs) {
    const double d = (p.correct ? 1.0 : 0.0) - p.confidence;
    acc += d * d;
  }
  return acc / static_cast<double>(pairs.size());
}

ConfidenceSummary confidence_summary(std::span<const double> confs) {
  if (confs.empty()) throw ValidationError("confs", "empty input");
  ConfidenceSummary out;
  out.histogram.assign(20, 0);
  std::vector<double> sorted(confs.begin(), confs.end());
  double sum = 0.0;
  for (double c : sorted) {
    if (!(c >= 0.0 && c <= 1.0)) throw ValidationError("confidence", "out of [0,1]");
    sum += c;
    ++out.histogram[std::min<std::size_t>(19, static_cast<std::size_t>(c * 20.0))];
  }
  out.mean = sum / static_cast<double>(sorted.size());
  std::sort(sorted.begin(), sorted.end());
  out.median = sorted[(sorted.size() - 1) / 2];  // lower median
  return out;
}

}  // namespace rlcm::calib
