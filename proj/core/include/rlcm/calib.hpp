#pragma once

#include <span>
#include <vector>

namespace rlcm::calib {

struct ConfidencePair {
  double confidence = 0.0;  // in [0,1]
  bool correct = false;
};

struct ReliabilityBin {
  double lo = 0.0;
  double hi = 0.0;
  int count = 0;
  double mean_conf = 0.0;  // 0 for empty bins
  double accuracy = 0.0;   // 0 for empty bins
};

struct ReliabilityTable {
  std::vector<ReliabilityBin> bins;
  int total = 0;
};

// Equal-width bins [(i-1)/B, i/B), last bin closed at 1. Confidences
// outside [0,1] are rejected. An empty input yields an all-empty table.
ReliabilityTable reliability_bins(std::span<const ConfidencePair> pairs, int num_bins);

struct CalibrationErrors {
  double ece = 0.0;
  double pce = 0.0;  // ECE restricted to bins with conf > acc
};

// ECE = sum_b (|S_b|/n) |acc(S_b) - conf(S_b)|, PCE the same over
// overconfident bins only. Throws if the table is empty (n = 0).
CalibrationErrors calibration_errors(const ReliabilityTable& table);

// Mean of (1[correct] - confidence)^2. Throws on empty input.
double brier_score(std::span<const ConfidencePair> pairs);

struct ConfidenceSummary {
  double mean = 0.0;
  double median = 0.0;  // lower median for even counts
  std::vector<int> histogram;  // fixed 20 bins over [0,1]
};

ConfidenceSummary confidence_summary(std::span<const double> confs);

}  // namespace rlcm::calib
