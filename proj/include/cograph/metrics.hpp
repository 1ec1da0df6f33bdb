#pragma once

#include <cstddef>
#include <map>
#include <vector>

namespace cograph {

struct ConfusionCounts {
  std::map<int, std::size_t> tp, fp, fn;
  std::size_t correct = 0;
  std::size_t total = 0;
};

struct MacroMetrics {
  double acc = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

ConfusionCounts confusion_counts(const std::vector<int>& preds,
                                 const std::vector<int>& golds,
                                 const std::vector<int>& classes);

// Unweighted per-class means with the 0-on-zero-division convention;
// acc = correct / total.
MacroMetrics macro_metrics(const std::vector<int>& preds,
                           const std::vector<int>& golds,
                           const std::vector<int>& classes);

}  // namespace cograph
