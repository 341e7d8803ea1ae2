#pragma once

// Reference implementations written independently of the library, used to
// cross-check it. Deliberately naive: quadratic loops, no shared helpers.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <iterator>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace oracle {

inline std::vector<std::string> normalized_tokens(const std::string& s) {
  std::string cleaned;
  for (unsigned char c : s) {
    if (std::ispunct(c)) continue;
    cleaned += static_cast<char>(std::tolower(c));
  }
  std::istringstream in(cleaned);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) {
    if (w == "a" || w == "an" || w == "the") continue;
    out.push_back(w);
  }
  return out;
}

inline std::string normalize(const std::string& s) {
  std::string out;
  for (const auto& t : normalized_tokens(s)) out += (out.empty() ? "" : " ") + t;
  return out;
}

inline double em(const std::string& pred, const std::vector<std::string>& golds) {
  for (const auto& g : golds) {
    if (normalize(pred) == normalize(g)) return 1.0;
  }
  return 0.0;
}

// Token-bag overlap by explicit pairing: each predicted token consumes one
// unused equal gold token.
inline double f1_single(const std::string& pred, const std::string& gold) {
  auto p = normalized_tokens(pred);
  auto g = normalized_tokens(gold);
  if (p.empty() && g.empty()) return 1.0;
  if (p.empty() || g.empty()) return 0.0;
  std::vector<bool> used(g.size(), false);
  double common = 0;
  for (const auto& t : p) {
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (!used[j] && g[j] == t) {
        used[j] = true;
        common += 1;
        break;
      }
    }
  }
  if (common == 0) return 0.0;
  double precision = common / static_cast<double>(p.size());
  double recall = common / static_cast<double>(g.size());
  return 2 * precision * recall / (precision + recall);
}

inline double f1(const std::string& pred, const std::vector<std::string>& golds) {
  double best = 0;
  for (const auto& g : golds) best = std::max(best, f1_single(pred, g));
  return best;
}

struct PR {
  double precision;
  double recall;
};

inline PR citation_pr(const std::vector<int>& pred, const std::set<int>& gold) {
  std::set<int> p(pred.begin(), pred.end());
  std::vector<int> both;
  std::set_intersection(p.begin(), p.end(), gold.begin(), gold.end(), std::back_inserter(both));
  PR r{0.0, 0.0};
  if (!p.empty()) r.precision = static_cast<double>(both.size()) / static_cast<double>(p.size());
  r.recall = static_cast<double>(both.size()) / static_cast<double>(gold.size());
  return r;
}

inline std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0, equal = 0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (v[j] < v[i]) less += 1;
      if (v[j] == v[i]) equal += 1;
    }
    r[i] = less + (equal + 1) / 2.0;
  }
  return r;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  double mx = sx / n, my = sy / n, sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  return pearson(ranks(x), ranks(y));
}

// Tau-b by enumerating every pair.
inline double kendall(const std::vector<double>& x, const std::vector<double>& y) {
  double concordant = 0, discordant = 0, tie_x = 0, tie_y = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      if (dx == 0 && dy == 0) continue;
      if (dx == 0) {
        tie_x += 1;
      } else if (dy == 0) {
        tie_y += 1;
      } else if ((dx > 0) == (dy > 0)) {
        concordant += 1;
      } else {
        discordant += 1;
      }
    }
  }
  return (concordant - discordant) /
         std::sqrt((concordant + discordant + tie_x) * (concordant + discordant + tie_y));
}

// round-half-up of ratio% of available, in integers.
inline std::size_t noise_count(int ratio, std::size_t available) {
  return (static_cast<std::size_t>(ratio) * available * 10 + 500) / 1000;
}

}  // namespace oracle
