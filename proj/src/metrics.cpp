#include "attribqa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "attribqa/error.hpp"
#include "attribqa/random.hpp"
#include "attribqa/text.hpp"

namespace attribqa {

std::string normalize_answer(std::string_view input) {
  std::string s = text::to_lower_ascii(input);
  std::string no_punct;
  no_punct.reserve(s.size());
  for (char c : s) {
    if (!text::is_ascii_punct(c)) no_punct.push_back(c);
  }
  std::string out;
  for (std::string_view tok : text::split_whitespace(no_punct)) {
    if (tok == "a" || tok == "an" || tok == "the") continue;
    if (!out.empty()) out += ' ';
    out.append(tok);
  }
  return out;
}

int exact_match(std::string_view prediction, const std::vector<std::string>& golds) {
  if (golds.empty()) throw UsageError("exact_match needs at least one reference");
  const std::string p = normalize_answer(prediction);
  for (const auto& g : golds) {
    if (p == normalize_answer(g)) return 1;
  }
  return 0;
}

namespace {

double token_f1(const std::string& pred_norm, const std::string& gold_norm) {
  auto pred = text::split_whitespace(pred_norm);
  auto gold = text::split_whitespace(gold_norm);
  if (pred.empty() && gold.empty()) return 1.0;
  if (pred.empty() || gold.empty()) return 0.0;
  std::map<std::string_view, long> counts;
  for (auto t : gold) ++counts[t];
  long common = 0;
  for (auto t : pred) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  if (common == 0) return 0.0;
  double precision = static_cast<double>(common) / static_cast<double>(pred.size());
  double recall = static_cast<double>(common) / static_cast<double>(gold.size());
  return 2.0 * precision * recall / (precision + recall);
}

}  // namespace

double f1_score(std::string_view prediction, const std::vector<std::string>& golds) {
  if (golds.empty()) throw UsageError("f1 needs at least one reference");
  const std::string p = normalize_answer(prediction);
  double best = 0.0;
  for (const auto& g : golds) best = std::max(best, token_f1(p, normalize_answer(g)));
  return best;
}

CitationScores citation_scores(const std::vector<int>& predicted, const std::set<int>& gold) {
  if (gold.empty()) throw UsageError("citation scores need a non-empty gold set");
  std::set<int> pred(predicted.begin(), predicted.end());
  std::size_t hit = 0;
  for (int p : pred) hit += gold.count(p);
  CitationScores s;
  s.precision = pred.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(pred.size());
  s.recall = static_cast<double>(hit) / static_cast<double>(gold.size());
  return s;
}

TrialMeans trial_means(const std::vector<ScoredPrediction>& predictions) {
  TrialMeans m;
  if (predictions.empty()) return m;
  double em = 0, f1 = 0, p = 0, r = 0;
  std::size_t np = 0, nr = 0;
  for (const auto& s : predictions) {
    em += s.em;
    f1 += s.f1;
    if (s.citation_precision) {
      p += *s.citation_precision;
      ++np;
    }
    if (s.citation_recall) {
      r += *s.citation_recall;
      ++nr;
    }
  }
  const double n = static_cast<double>(predictions.size());
  m.em = em / n;
  m.f1 = f1 / n;
  if (np) m.citation_precision = p / static_cast<double>(np);
  if (nr) m.citation_recall = r / static_cast<double>(nr);
  return m;
}

MetricReport aggregate(const std::vector<std::vector<ScoredPrediction>>& trials) {
  if (trials.empty()) throw UsageError("aggregate needs at least one trial");
  for (const auto& t : trials) {
    if (t.size() != trials.front().size()) {
      throw DataError("ragged trials: prediction counts differ between trials");
    }
  }
  MetricReport report;
  double p = 0, r = 0;
  std::size_t np = 0, nr = 0;
  for (const auto& t : trials) {
    TrialMeans m = trial_means(t);
    report.mean_em += m.em;
    report.mean_f1 += m.f1;
    if (m.citation_precision) {
      p += *m.citation_precision;
      ++np;
    }
    if (m.citation_recall) {
      r += *m.citation_recall;
      ++nr;
    }
    report.per_trial.push_back(m);
  }
  const double n = static_cast<double>(trials.size());
  report.mean_em /= n;
  report.mean_f1 /= n;
  if (np) report.mean_citation_precision = p / static_cast<double>(np);
  if (nr) report.mean_citation_recall = r / static_cast<double>(nr);
  return report;
}

double performance_range(const std::vector<double>& values) {
  if (values.empty()) throw UsageError("performance range of an empty series");
  auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return *hi - *lo;
}

std::string_view to_string(CorrelationMethod method) {
  switch (method) {
    case CorrelationMethod::pearson: return "pearson";
    case CorrelationMethod::spearman: return "spearman";
    case CorrelationMethod::kendall: return "kendall";
  }
  return "?";
}

double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw DataError("undefined correlation");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> average_ranks(const std::vector<double>& values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  return pearson(average_ranks(xs), average_ranks(ys));
}

namespace {

// Sum over tie groups of t(t-1)/2 in an already sorted sequence.
template <typename Eq>
long long tied_pairs(std::size_t n, Eq same_as_prev) {
  long long total = 0;
  long long run = 1;
  for (std::size_t i = 1; i < n; ++i) {
    if (same_as_prev(i)) {
      ++run;
    } else {
      total += run * (run - 1) / 2;
      run = 1;
    }
  }
  total += run * (run - 1) / 2;
  return total;
}

// Stable merge sort on v counting strict inversions.
long long merge_count(std::vector<double>& v, std::vector<double>& buf, std::size_t lo,
                      std::size_t hi) {
  if (hi - lo < 2) return 0;
  std::size_t mid = lo + (hi - lo) / 2;
  long long swaps = merge_count(v, buf, lo, mid) + merge_count(v, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += static_cast<long long>(mid - i);
      buf[k++] = v[j++];
    } else {
      buf[k++] = v[i++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + static_cast<long>(lo), buf.begin() + static_cast<long>(hi),
            v.begin() + static_cast<long>(lo));
  return swaps;
}

}  // namespace

double kendall_tau_b(const std::vector<double>& xs, const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return xs[a] != xs[b] ? xs[a] < xs[b] : ys[a] < ys[b];
  });

  const long long n0 = static_cast<long long>(n) * static_cast<long long>(n - 1) / 2;
  const long long n1 = tied_pairs(n, [&](std::size_t i) { return xs[order[i]] == xs[order[i - 1]]; });
  const long long n3 = tied_pairs(n, [&](std::size_t i) {
    return xs[order[i]] == xs[order[i - 1]] && ys[order[i]] == ys[order[i - 1]];
  });

  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = ys[order[i]];
  std::vector<double> buf(n);
  const long long swaps = merge_count(y, buf, 0, n);
  const long long n2 = tied_pairs(n, [&](std::size_t i) { return y[i] == y[i - 1]; });

  const double denom = std::sqrt(static_cast<double>(n0 - n1) * static_cast<double>(n0 - n2));
  if (denom == 0.0) throw DataError("undefined correlation");
  const double numer = static_cast<double>(n0 - n1 - n2 + n3 - 2 * swaps);
  return std::clamp(numer / denom, -1.0, 1.0);
}

CorrelationResult correlation(const std::vector<double>& xs, const std::vector<double>& ys,
                              CorrelationMethod method, const PermutationOptions& options) {
  if (xs.size() != ys.size() || xs.size() < 3) throw DataError("undefined correlation");
  auto constant = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
  };
  if (constant(xs) || constant(ys)) throw DataError("undefined correlation");

  // Spearman permutes ranks directly; ranking is invariant under permutation.
  std::vector<double> a = xs;
  std::vector<double> b = ys;
  if (method == CorrelationMethod::spearman) {
    a = average_ranks(xs);
    b = average_ranks(ys);
  }
  auto statistic = [&](const std::vector<double>& other) {
    return method == CorrelationMethod::kendall ? kendall_tau_b(a, other) : pearson(a, other);
  };

  CorrelationResult result;
  result.method = method;
  result.coefficient = statistic(b);

  Rng rng(options.seed);
  std::size_t extreme = 0;
  const double observed = std::abs(result.coefficient) - 1e-12;
  std::vector<double> shuffled = b;
  for (std::size_t k = 0; k < options.permutations; ++k) {
    rng.shuffle(shuffled);
    if (std::abs(statistic(shuffled)) >= observed) ++extreme;
  }
  result.p_value = static_cast<double>(extreme + 1) / static_cast<double>(options.permutations + 1);
  return result;
}

}  // namespace attribqa
