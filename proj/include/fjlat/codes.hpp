#pragma once

// Storage-code layouts: which servers hold an object's systematic copy and its
// recovery groups. Layouts carry server indices only; queueing behavior depends
// on which servers a request contacts, not on the field arithmetic behind them.

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fjlat/errors.hpp"

namespace fjlat {

struct CodeParams {
  int n = 0;  // server count
  int k = 0;  // object count
  int r = 1;  // locality: recovery-group size
  int t = 0;  // availability: disjoint recovery groups per object
  std::optional<int> min_distance;  // supplied, never computed
};

struct ObjectPlacement {
  int systematic = 0;
  std::vector<std::vector<int>> recovery_groups;  // t groups of r indices
};

struct StorageLayout {
  std::string name;
  CodeParams params;
  std::vector<ObjectPlacement> objects;  // size k
};

struct PopularityVector {
  std::vector<double> p;
};

inline void validate_popularity(const PopularityVector& pop) {
  double sum = 0.0;
  for (double pi : pop.p) {
    if (pi < 0.0 || pi > 1.0)
      throw invalid_parameter_error("popularity entries must lie in [0,1]");
    sum += pi;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw invalid_parameter_error("popularity must sum to 1");
}

inline PopularityVector uniform_popularity(int k) {
  return {std::vector<double>(k, 1.0 / k)};
}

// floor(k/3) "hot" objects share 0.9 of the mass, the rest share 0.1. The hot
// objects are strided across the index range so that codes whose recovery
// groups partition consecutive objects see the hot load spread over groups.
inline PopularityVector skewed_popularity(int k) {
  int hot = std::max(1, k / 3);
  PopularityVector pop{std::vector<double>(k, 0.0)};
  if (hot == k) {
    pop.p.assign(k, 1.0 / k);
    return pop;
  }
  for (int i = 0; i < k; ++i) pop.p[i] = 0.1 / (k - hot);
  for (int i = 0; i < hot; ++i) pop.p[i * k / hot] = 0.9 / hot;
  return pop;
}

inline void validate_params(const CodeParams& p) {
  if (p.k < 1 || p.n < p.k) throw invalid_parameter_error("need n >= k >= 1");
  if (p.r < 1) throw invalid_parameter_error("need r >= 1");
  if (p.t < 0) throw invalid_parameter_error("need t >= 0");
  if (1 + p.t * p.r > p.n)
    throw invalid_parameter_error("need 1 + t*r <= n");
  if (p.min_distance && *p.min_distance < 1)
    throw invalid_parameter_error("need min_distance >= 1");
}

// Returns the first violated layout invariant, or nullopt if the layout is ok.
inline std::optional<std::string> validate_layout(const StorageLayout& layout) {
  try {
    validate_params(layout.params);
  } catch (const invalid_parameter_error& e) {
    return std::string(e.what());
  }
  const auto& p = layout.params;
  if (static_cast<int>(layout.objects.size()) != p.k)
    return "object count != k";
  for (int i = 0; i < p.k; ++i) {
    const auto& obj = layout.objects[i];
    if (obj.systematic < 0 || obj.systematic >= p.n)
      return "systematic index out of range";
    if (static_cast<int>(obj.recovery_groups.size()) != p.t)
      return "group count != t";
    std::set<int> seen;
    for (const auto& g : obj.recovery_groups) {
      if (static_cast<int>(g.size()) != p.r) return "group size != r";
      for (int s : g) {
        if (s < 0 || s >= p.n) return "group index out of range";
        if (s == obj.systematic) return "group contains systematic server";
        if (!seen.insert(s).second) return "groups not disjoint";
      }
    }
  }
  return std::nullopt;
}

inline void require_valid(const StorageLayout& layout) {
  if (auto v = validate_layout(layout))
    throw invalid_parameter_error("invalid layout: " + *v);
}

// Binary Simplex code on the nonzero length-m vectors: server index v-1 holds
// combination v (bitmask), object i sits on unit vector e_i, and the pairs
// {v, v^e_i} partition the remaining servers into t = 2^(m-1)-1 groups.
inline StorageLayout simplex_layout(int m) {
  if (m < 1) throw invalid_parameter_error("simplex_layout: need m >= 1");
  if (m > 20) throw invalid_parameter_error("simplex_layout: need m <= 20");
  int n = (1 << m) - 1;
  StorageLayout layout;
  layout.params = {n, m, 2, (1 << (m - 1)) - 1, 1 << (m - 1)};
  layout.name = "simplex(" + std::to_string(m) + ")";
  layout.objects.resize(m);
  for (int i = 0; i < m; ++i) {
    int e = 1 << i;
    auto& obj = layout.objects[i];
    obj.systematic = e - 1;
    for (int v = 1; v <= n; ++v) {
      int w = v ^ e;
      if (v == e || v > w) continue;  // skip systematic, emit each pair once
      obj.recovery_groups.push_back({v - 1, w - 1});
    }
  }
  require_valid(layout);
  return layout;
}

// Concatenates two layouts with equal (r, t); b's servers shift by a.n.
inline StorageLayout direct_sum(const StorageLayout& a, const StorageLayout& b) {
  if (a.params.r != b.params.r || a.params.t != b.params.t)
    throw invalid_parameter_error("direct_sum: (r,t) must match");
  StorageLayout out;
  out.params = a.params;
  out.params.n = a.params.n + b.params.n;
  out.params.k = a.params.k + b.params.k;
  if (a.params.min_distance && b.params.min_distance)
    out.params.min_distance =
        std::min(*a.params.min_distance, *b.params.min_distance);
  else
    out.params.min_distance.reset();
  out.name = a.name + "+" + b.name;
  out.objects = a.objects;
  for (const auto& obj : b.objects) {
    ObjectPlacement shifted;
    shifted.systematic = obj.systematic + a.params.n;
    for (const auto& g : obj.recovery_groups) {
      std::vector<int> sg;
      for (int s : g) sg.push_back(s + a.params.n);
      shifted.recovery_groups.push_back(std::move(sg));
    }
    out.objects.push_back(std::move(shifted));
  }
  require_valid(out);
  return out;
}

// t_rep copies of each object: systematic plus t_rep-1 singleton groups.
inline StorageLayout replication_layout(int k, int t_rep) {
  if (k < 1 || t_rep < 1)
    throw invalid_parameter_error("replication_layout: need k, t_rep >= 1");
  StorageLayout layout;
  layout.params = {k * t_rep, k, 1, t_rep - 1, t_rep};
  layout.name = std::to_string(t_rep) + "-replication(k=" + std::to_string(k) + ")";
  layout.objects.resize(k);
  for (int i = 0; i < k; ++i) {
    auto& obj = layout.objects[i];
    obj.systematic = i * t_rep;
    for (int j = 1; j < t_rep; ++j)
      obj.recovery_groups.push_back({i * t_rep + j});
  }
  require_valid(layout);
  return layout;
}

// Azure-style (10,6,3,1)-LRC as printed in the comparison table: two local
// groups of three data servers plus a local parity each; two global parities
// (servers 8, 9) take no part in single-object recovery.
inline StorageLayout azure_lrc_layout() {
  StorageLayout layout;
  layout.params = {10, 6, 3, 1, 4};
  layout.name = "(10,6,3,1)-LRC";
  layout.objects.resize(6);
  for (int i = 0; i < 6; ++i) {
    int half = i / 3;                 // data 0-2 -> parity 6, data 3-5 -> parity 7
    std::vector<int> group{6 + half};
    for (int j = 3 * half; j < 3 * half + 3; ++j)
      if (j != i) group.push_back(j);
    std::sort(group.begin(), group.end());
    layout.objects[i] = {i, {group}};
  }
  require_valid(layout);
  return layout;
}

inline CodeParams azure_lrc_params_table() { return {10, 6, 3, 1, 4}; }
// The running-text variant of the same code; shipped for completeness, the
// comparison table uses the (10,6,3,1) parameterization.
inline CodeParams azure_lrc_params_text() { return {10, 6, 2, 1, 4}; }

// One object, one systematic server plus t disjoint groups of r: the minimal
// layout exercising a given (r, t) under fixed-arrival access.
inline StorageLayout single_object_layout(int r, int t) {
  if (r < 1 || t < 0)
    throw invalid_parameter_error("single_object_layout: need r>=1, t>=0");
  StorageLayout layout;
  layout.params = {1 + r * t, 1, r, t, std::nullopt};
  layout.name = "single(r=" + std::to_string(r) + ",t=" + std::to_string(t) + ")";
  ObjectPlacement obj;
  obj.systematic = 0;
  for (int g = 0; g < t; ++g) {
    std::vector<int> group;
    for (int j = 0; j < r; ++j) group.push_back(1 + g * r + j);
    obj.recovery_groups.push_back(std::move(group));
  }
  layout.objects.push_back(std::move(obj));
  require_valid(layout);
  return layout;
}

// (n,k)-MDS placement: object i on server i, no recovery groups. The k-of-rest
// completion rule is a simulator access mode, not a layout property.
inline StorageLayout mds_layout(int n, int k) {
  if (k < 1 || n < k) throw invalid_parameter_error("mds_layout: need n >= k >= 1");
  StorageLayout layout;
  layout.params = {n, k, 1, 0, n - k + 1};
  layout.name = "(" + std::to_string(n) + "," + std::to_string(k) + ")-MDS";
  layout.objects.resize(k);
  for (int i = 0; i < k; ++i) layout.objects[i] = {i, {}};
  require_valid(layout);
  return layout;
}

inline double storage_overhead(const CodeParams& params) {
  validate_params(params);
  return static_cast<double>(params.n) / params.k;
}

inline int fault_tolerance(int min_distance) {
  if (min_distance < 1)
    throw invalid_parameter_error("fault_tolerance: need min_distance >= 1");
  return min_distance - 1;
}

// --- layout text format ------------------------------------------------
//
//   layout <name>
//   params n k r t [min_distance]
//   object <i> systematic <s> groups (a,b)(c,d)...

inline std::string write_layout(const StorageLayout& layout) {
  std::ostringstream out;
  out << "layout " << (layout.name.empty() ? "unnamed" : layout.name) << "\n";
  out << "params " << layout.params.n << " " << layout.params.k << " "
      << layout.params.r << " " << layout.params.t;
  if (layout.params.min_distance) out << " " << *layout.params.min_distance;
  out << "\n";
  for (std::size_t i = 0; i < layout.objects.size(); ++i) {
    const auto& obj = layout.objects[i];
    out << "object " << i << " systematic " << obj.systematic << " groups";
    for (const auto& g : obj.recovery_groups) {
      out << " (";
      for (std::size_t j = 0; j < g.size(); ++j)
        out << (j ? "," : "") << g[j];
      out << ")";
    }
    out << "\n";
  }
  return out.str();
}

inline StorageLayout parse_layout(std::istream& in) {
  StorageLayout layout;
  std::string line;
  bool have_params = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "layout") {
      std::getline(ls >> std::ws, layout.name);
    } else if (tag == "params") {
      ls >> layout.params.n >> layout.params.k >> layout.params.r >>
          layout.params.t;
      int d;
      if (ls >> d) layout.params.min_distance = d;
      have_params = true;
      layout.objects.resize(layout.params.k);
    } else if (tag == "object") {
      if (!have_params)
        throw invalid_parameter_error("layout file: object before params");
      int idx;
      std::string kw;
      ObjectPlacement obj;
      ls >> idx >> kw >> obj.systematic >> kw;
      std::string rest;
      std::getline(ls, rest);
      std::vector<int> group;
      int value = 0;
      bool in_number = false;
      for (char c : rest) {
        if (c >= '0' && c <= '9') {
          value = value * 10 + (c - '0');
          in_number = true;
        } else {
          if (in_number) group.push_back(value);
          value = 0;
          in_number = false;
          if (c == ')') {
            obj.recovery_groups.push_back(group);
            group.clear();
          }
        }
      }
      if (idx < 0 || idx >= static_cast<int>(layout.objects.size()))
        throw invalid_parameter_error("layout file: object index out of range");
      layout.objects[idx] = std::move(obj);
    } else {
      throw invalid_parameter_error("layout file: unknown line tag '" + tag + "'");
    }
  }
  require_valid(layout);
  return layout;
}

inline StorageLayout read_layout_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw invalid_parameter_error("cannot open layout file " + path);
  return parse_layout(in);
}

inline void write_layout_file(const StorageLayout& layout,
                              const std::string& path) {
  std::ofstream out(path);
  if (!out) throw invalid_parameter_error("cannot write layout file " + path);
  out << write_layout(layout);
}

}  // namespace fjlat
