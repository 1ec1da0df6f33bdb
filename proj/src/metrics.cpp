#include "cograph/metrics.hpp"

#include <set>
#include <string>

#include "cograph/errors.hpp"

namespace cograph {

ConfusionCounts confusion_counts(const std::vector<int>& preds,
                                 const std::vector<int>& golds,
                                 const std::vector<int>& classes) {
  if (preds.size() != golds.size()) {
    throw ShapeError("confusion_counts: " + std::to_string(preds.size()) +
                     " predictions vs " + std::to_string(golds.size()) + " golds");
  }
  if (classes.empty()) throw DomainError("confusion_counts: empty class list");
  std::set<int> class_set(classes.begin(), classes.end());
  if (class_set.size() != classes.size()) {
    throw DomainError("confusion_counts: duplicate class label");
  }

  ConfusionCounts c;
  for (int cls : classes) {
    c.tp[cls] = 0;
    c.fp[cls] = 0;
    c.fn[cls] = 0;
  }
  c.total = preds.size();
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (class_set.count(golds[i]) == 0) {
      throw DataError("confusion_counts: gold label " + std::to_string(golds[i]) +
                      " at position " + std::to_string(i) + " not in class list");
    }
    if (preds[i] == golds[i]) {
      ++c.correct;
      ++c.tp[golds[i]];
    } else {
      ++c.fn[golds[i]];
      if (class_set.count(preds[i]) != 0) ++c.fp[preds[i]];
    }
  }
  return c;
}

MacroMetrics macro_metrics(const std::vector<int>& preds,
                           const std::vector<int>& golds,
                           const std::vector<int>& classes) {
  const ConfusionCounts c = confusion_counts(preds, golds, classes);

  double p_sum = 0.0, r_sum = 0.0, f_sum = 0.0;
  for (int cls : classes) {
    const double tp = static_cast<double>(c.tp.at(cls));
    const double fp = static_cast<double>(c.fp.at(cls));
    const double fn = static_cast<double>(c.fn.at(cls));
    const double p = tp + fp > 0.0 ? tp / (tp + fp) : 0.0;
    const double r = tp + fn > 0.0 ? tp / (tp + fn) : 0.0;
    const double f = p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
    p_sum += p;
    r_sum += r;
    f_sum += f;
  }

  MacroMetrics m;
  const double k = static_cast<double>(classes.size());
  m.acc = c.total > 0 ? static_cast<double>(c.correct) / static_cast<double>(c.total) : 0.0;
  m.precision = p_sum / k;
  m.recall = r_sum / k;
  m.f1 = f_sum / k;
  return m;
}

}  // namespace cograph
