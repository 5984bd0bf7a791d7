#include "herdkit/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <utility>

#include <CLI11.hpp>
#include <json.hpp>

#include "herdkit/graph.hpp"
#include "herdkit/leader_follower.hpp"
#include "herdkit/linalg.hpp"
#include "herdkit/oracle.hpp"
#include "herdkit/sim.hpp"
#include "herdkit/tree.hpp"
#include "herdkit/unisign.hpp"

namespace herd {

namespace {

using nlohmann::json;

constexpr const char* kSchema = "herdkit/1";
constexpr const char* kConvention =
    "edge (i,j,w) encodes the arc i->j with weight w, stored as A[j][i]; "
    "indices are 1-based";

bool integral_double(double v) {
  return std::isfinite(v) && v == std::trunc(v) && std::abs(v) <= 9.007199254740992e15;
}

// Report values carry at most 12 significant digits; integral results are
// emitted as JSON integers so reports stay byte-stable.
double round12(double v) {
  if (!std::isfinite(v)) throw NumericError("non-finite value in a report");
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::strtod(buf, nullptr);
}

json num(double v) {
  double r = round12(v);
  if (integral_double(r)) return json(static_cast<long long>(r));
  return json(r);
}

// Serialization keeps exact values (no display rounding).
json serial_num(double v) {
  if (integral_double(v)) return json(static_cast<long long>(v));
  return json(v);
}

template <class S>
json vec_json(const Vec<S>& v) {
  json arr = json::array();
  for (Index i = 0; i < v.size(); ++i)
    arr.push_back(num(scalar_traits<S>::to_double(v[i])));
  return arr;
}

template <class S>
json mat_json(const Mat<S>& M) {
  json rows = json::array();
  for (Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < M.cols(); ++j)
      row.push_back(num(scalar_traits<S>::to_double(M(i, j))));
    rows.push_back(std::move(row));
  }
  return rows;
}

int status_exit(Status s) {
  switch (s) {
    case Status::Herdable: return 0;
    case Status::NotHerdable: return 1;
    default: return 2;
  }
}

json base_report(const std::string& command, const std::string& input,
                 const char* mode_name, double eps) {
  json rep;
  rep["schema"] = kSchema;
  rep["command"] = command;
  rep["input"] = input;
  rep["mode"] = mode_name;
  rep["eps"] = num(eps);
  rep["convention"] = kConvention;
  return rep;
}

template <class S>
void attach_verdict(json& rep, const Verdict<S>& v) {
  rep["status"] = status_name(v.status);
  rep["detail"] = v.detail;
  if (v.certificate) rep["certificate"] = vec_json(*v.certificate);
  if (v.witness) rep["witness"] = vec_json(*v.witness);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double parse_strict_double(const std::string& tok, const std::string& where) {
  char* end = nullptr;
  double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size() || tok.empty())
    throw ParseError(where + ": bad number '" + tok + "'");
  if (!std::isfinite(v)) throw ParseError(where + ": non-finite number");
  return v;
}

long long parse_strict_int(const std::string& tok, const std::string& where) {
  char* end = nullptr;
  long long v = std::strtoll(tok.c_str(), &end, 10);
  if (end != tok.c_str() + tok.size() || tok.empty())
    throw ParseError(where + ": bad integer '" + tok + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parts;
}

double json_weight(const json& v, const std::string& where) {
  if (!v.is_number()) throw ParseError(where + ": expected a number");
  double d = v.get<double>();
  if (!std::isfinite(d)) throw ParseError(where + ": non-finite number");
  return d;
}

std::vector<Index> parse_leaders_array(const json& arr, Index n,
                                       const std::string& src) {
  if (!arr.is_array() || arr.empty())
    throw ParseError(src + ": 'leaders' must be a nonempty array");
  std::vector<Index> leaders;
  std::set<long long> seen;
  for (const auto& v : arr) {
    if (!v.is_number_integer())
      throw ParseError(src + ": leader indices must be integers");
    long long idx = v.get<long long>();
    if (idx < 1 || idx > n)
      throw ParseError(src + ": leader index " + std::to_string(idx) +
                       " outside 1.." + std::to_string(n));
    if (!seen.insert(idx).second)
      throw ParseError(src + ": duplicate leader " + std::to_string(idx));
    leaders.push_back(static_cast<Index>(idx - 1));
  }
  std::sort(leaders.begin(), leaders.end());
  return leaders;
}

SystemDescriptor parse_system_json(const std::string& text,
                                   const std::string& src) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(src + ": " + e.what());
  }
  if (!j.is_object()) throw ParseError(src + ": top level must be an object");
  SystemDescriptor d;
  if (!j.contains("n") || !j["n"].is_number_integer())
    throw ParseError(src + ": missing integer field 'n'");
  long long n = j["n"].get<long long>();
  if (n < 1 || n > 10000)
    throw ParseError(src + ": n must lie in 1..10000");
  d.n = static_cast<Index>(n);
  if (j.contains("directed")) {
    if (!j["directed"].is_boolean())
      throw ParseError(src + ": 'directed' must be a boolean");
    d.directed = j["directed"].get<bool>();
  }
  if (j.contains("mode")) {
    std::string m = j["mode"].is_string() ? j["mode"].get<std::string>() : "";
    if (m == "float") d.mode = SystemDescriptor::Mode::Float;
    else if (m == "exact") d.mode = SystemDescriptor::Mode::Exact;
    else throw ParseError(src + ": 'mode' must be \"float\" or \"exact\"");
  }

  const bool has_A = j.contains("A"), has_edges = j.contains("edges");
  if (has_A == has_edges)
    throw ParseError(src + ": provide exactly one of 'A' and 'edges'");
  d.A.assign(d.n, std::vector<double>(d.n, 0.0));
  if (has_A) {
    d.form = SystemDescriptor::Form::DenseJson;
    const auto& rows = j["A"];
    if (!rows.is_array() || static_cast<Index>(rows.size()) != d.n)
      throw ParseError(src + ": 'A' must be an array of " +
                       std::to_string(d.n) + " rows");
    for (Index i = 0; i < d.n; ++i) {
      const auto& row = rows[i];
      if (!row.is_array() || static_cast<Index>(row.size()) != d.n)
        throw ParseError(src + ": row " + std::to_string(i + 1) +
                         " of 'A' must have " + std::to_string(d.n) +
                         " entries");
      for (Index c = 0; c < d.n; ++c)
        d.A[i][c] = json_weight(row[c], src + ": A[" + std::to_string(i + 1) +
                                            "][" + std::to_string(c + 1) + "]");
    }
  } else {
    d.form = SystemDescriptor::Form::EdgesJson;
    const auto& edges = j["edges"];
    if (!edges.is_array())
      throw ParseError(src + ": 'edges' must be an array");
    std::set<std::pair<long long, long long>> seen;
    for (size_t e = 0; e < edges.size(); ++e) {
      const auto& t = edges[e];
      const std::string where = src + ": edge " + std::to_string(e + 1);
      if (!t.is_array() || t.size() != 3)
        throw ParseError(where + " must be [i, j, w]");
      if (!t[0].is_number_integer() || !t[1].is_number_integer())
        throw ParseError(where + ": endpoints must be integers");
      long long i = t[0].get<long long>(), jj = t[1].get<long long>();
      if (i < 1 || i > d.n || jj < 1 || jj > d.n)
        throw ParseError(where + ": endpoint outside 1.." +
                         std::to_string(d.n));
      double w = json_weight(t[2], where);
      auto key = d.directed ? std::make_pair(i, jj)
                            : std::make_pair(std::min(i, jj), std::max(i, jj));
      if (!seen.insert(key).second)
        throw ParseError(where + ": duplicate edge");
      d.A[jj - 1][i - 1] = w;
      if (!d.directed) d.A[i - 1][jj - 1] = w;
    }
  }

  const bool has_leaders = j.contains("leaders"), has_B = j.contains("B");
  if (has_leaders && has_B)
    throw ConventionError(src + ": 'leaders' and 'B' are mutually exclusive");
  if (!has_leaders && !has_B)
    throw ConventionError(src + ": one of 'leaders' or 'B' is required");
  if (has_leaders) {
    d.leaders = parse_leaders_array(j["leaders"], d.n, src);
  } else {
    const auto& rows = j["B"];
    if (!rows.is_array() || static_cast<Index>(rows.size()) != d.n)
      throw ParseError(src + ": 'B' must have " + std::to_string(d.n) +
                       " rows");
    size_t m = 0;
    std::vector<std::vector<double>> B(d.n);
    for (Index i = 0; i < d.n; ++i) {
      const auto& row = rows[i];
      if (!row.is_array() || row.empty())
        throw ParseError(src + ": 'B' rows must be nonempty arrays");
      if (i == 0) m = row.size();
      else if (row.size() != m)
        throw ParseError(src + ": ragged 'B'");
      for (const auto& v : row)
        B[i].push_back(json_weight(v, src + ": B row " +
                                          std::to_string(i + 1)));
    }
    d.B = std::move(B);
  }
  if (d.mode == SystemDescriptor::Mode::Exact) {
    SystemDescriptor copy = d;
    require_integral(copy);
  }
  return d;
}

SystemDescriptor parse_system_edgelist(const std::string& text,
                                       const std::string& src) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  SystemDescriptor d;
  d.form = SystemDescriptor::Form::EdgeList;
  bool header_done = false;
  std::set<std::pair<long long, long long>> seen;
  while (std::getline(in, line)) {
    ++lineno;
    // Strip a trailing CR so CRLF files parse too.
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string trimmed = line;
    trimmed.erase(0, trimmed.find_first_not_of(" \t"));
    if (trimmed.empty()) continue;
    const std::string where = src + ":" + std::to_string(lineno);
    if (!header_done) {
      if (trimmed[0] != '#')
        throw ParseError(where + ": expected the '# n=... leaders=... "
                         "directed=...' header first");
      std::istringstream hs(trimmed.substr(1));
      std::vector<std::string> toks;
      std::string t;
      while (hs >> t) toks.push_back(t);
      if (toks.size() != 3 || toks[0].rfind("n=", 0) != 0 ||
          toks[1].rfind("leaders=", 0) != 0 ||
          toks[2].rfind("directed=", 0) != 0)
        throw ParseError(where + ": header must be '# n=<int> leaders=<csv> "
                         "directed=<0|1>'");
      long long n = parse_strict_int(toks[0].substr(2), where);
      if (n < 1 || n > 10000) throw ParseError(where + ": n out of range");
      d.n = static_cast<Index>(n);
      d.A.assign(d.n, std::vector<double>(d.n, 0.0));
      std::vector<Index> leaders;
      std::set<long long> lseen;
      for (const auto& part : split(toks[1].substr(8), ',')) {
        long long idx = parse_strict_int(part, where);
        if (idx < 1 || idx > n)
          throw ParseError(where + ": leader " + std::to_string(idx) +
                           " outside 1.." + std::to_string(n));
        if (!lseen.insert(idx).second)
          throw ParseError(where + ": duplicate leader");
        leaders.push_back(static_cast<Index>(idx - 1));
      }
      if (leaders.empty()) throw ParseError(where + ": empty leader list");
      std::sort(leaders.begin(), leaders.end());
      d.leaders = std::move(leaders);
      std::string dir = toks[2].substr(9);
      if (dir == "0") d.directed = false;
      else if (dir == "1") d.directed = true;
      else throw ParseError(where + ": directed must be 0 or 1");
      header_done = true;
      continue;
    }
    if (trimmed[0] == '#') continue;
    std::istringstream ls(trimmed);
    std::vector<std::string> toks;
    std::string t;
    while (ls >> t) toks.push_back(t);
    if (toks.size() != 3)
      throw ParseError(where + ": expected 'i j w'");
    long long i = parse_strict_int(toks[0], where);
    long long jj = parse_strict_int(toks[1], where);
    if (i < 1 || i > d.n || jj < 1 || jj > d.n)
      throw ParseError(where + ": endpoint outside 1.." + std::to_string(d.n));
    double w = parse_strict_double(toks[2], where);
    auto key = d.directed ? std::make_pair(i, jj)
                          : std::make_pair(std::min(i, jj), std::max(i, jj));
    if (!seen.insert(key).second)
      throw ParseError(where + ": duplicate edge");
    d.A[jj - 1][i - 1] = w;
    if (!d.directed) d.A[i - 1][jj - 1] = w;
  }
  if (!header_done)
    throw ParseError(src + ": empty edge-list input");
  return d;
}

std::string format_weight(double v) {
  if (integral_double(v)) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(v));
    return buf;
  }
  return json(v).dump();
}

}  // namespace

SystemDescriptor parse_system(const std::string& text,
                              const std::string& source_name) {
  size_t first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos)
    throw ParseError(source_name + ": empty input");
  if (text[first] == '{') return parse_system_json(text, source_name);
  return parse_system_edgelist(text, source_name);
}

DiagonalDescriptor parse_diagonal(const std::string& text,
                                  const std::string& source_name) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(source_name + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("lambda") || !j.contains("gamma"))
    throw ParseError(source_name +
                     ": expected an object with 'lambda' and 'gamma'");
  DiagonalDescriptor d;
  for (const char* key : {"lambda", "gamma"}) {
    const auto& arr = j[key];
    if (!arr.is_array() || arr.empty())
      throw ParseError(source_name + ": '" + key +
                       "' must be a nonempty array");
    auto& dst = (std::string(key) == "lambda") ? d.lambda : d.gamma;
    for (const auto& v : arr)
      dst.push_back(json_weight(v, source_name + ": " + key));
  }
  if (d.lambda.size() != d.gamma.size())
    throw ParseError(source_name + ": 'lambda' and 'gamma' lengths differ");
  if (j.contains("mode")) {
    std::string m = j["mode"].is_string() ? j["mode"].get<std::string>() : "";
    if (m == "float") d.mode = SystemDescriptor::Mode::Float;
    else if (m == "exact") d.mode = SystemDescriptor::Mode::Exact;
    else throw ParseError(source_name + ": 'mode' must be \"float\" or \"exact\"");
  }
  return d;
}

void require_integral(const SystemDescriptor& desc) {
  for (Index i = 0; i < desc.n; ++i)
    for (Index j = 0; j < desc.n; ++j)
      if (!integral_double(desc.A[i][j]))
        throw ParseError("exact mode requires integer weights; A[" +
                         std::to_string(i + 1) + "][" + std::to_string(j + 1) +
                         "] is fractional");
  if (desc.B) {
    for (size_t i = 0; i < desc.B->size(); ++i)
      for (size_t j = 0; j < (*desc.B)[i].size(); ++j)
        if (!integral_double((*desc.B)[i][j]))
          throw ParseError("exact mode requires integer weights; B[" +
                           std::to_string(i + 1) + "][" +
                           std::to_string(j + 1) + "] is fractional");
  }
}

std::string serialize_system(const SystemDescriptor& desc) {
  const char* mode = desc.mode == SystemDescriptor::Mode::Exact ? "exact"
                                                                : "float";
  if (desc.form == SystemDescriptor::Form::EdgeList) {
    std::ostringstream out;
    out << "# n=" << desc.n << " leaders=";
    const auto& L = *desc.leaders;
    for (size_t i = 0; i < L.size(); ++i)
      out << (i ? "," : "") << (L[i] + 1);
    out << " directed=" << (desc.directed ? 1 : 0) << "\n";
    for (Index r = 0; r < desc.n; ++r) {
      for (Index c = 0; c < desc.n; ++c) {
        if (desc.A[r][c] == 0.0) continue;
        if (!desc.directed && c > r) continue;  // one line per edge
        // arc source = column, target = row
        out << (c + 1) << " " << (r + 1) << " " << format_weight(desc.A[r][c])
            << "\n";
      }
    }
    return out.str();
  }
  json j;
  j["n"] = static_cast<long long>(desc.n);
  j["directed"] = desc.directed;
  j["mode"] = mode;
  if (desc.form == SystemDescriptor::Form::DenseJson) {
    json rows = json::array();
    for (Index i = 0; i < desc.n; ++i) {
      json row = json::array();
      for (Index c = 0; c < desc.n; ++c) row.push_back(serial_num(desc.A[i][c]));
      rows.push_back(std::move(row));
    }
    j["A"] = std::move(rows);
  } else {
    json edges = json::array();
    for (Index r = 0; r < desc.n; ++r) {
      for (Index c = 0; c < desc.n; ++c) {
        if (desc.A[r][c] == 0.0) continue;
        if (!desc.directed && c > r) continue;
        edges.push_back(json::array({static_cast<long long>(c + 1),
                                     static_cast<long long>(r + 1),
                                     serial_num(desc.A[r][c])}));
      }
    }
    std::sort(edges.begin(), edges.end(), [](const json& a, const json& b) {
      if (a[0] != b[0]) return a[0].get<long long>() < b[0].get<long long>();
      return a[1].get<long long>() < b[1].get<long long>();
    });
    j["edges"] = std::move(edges);
  }
  if (desc.leaders) {
    json L = json::array();
    for (Index l : *desc.leaders) L.push_back(static_cast<long long>(l + 1));
    j["leaders"] = std::move(L);
  } else {
    json rows = json::array();
    for (const auto& row : *desc.B) {
      json r = json::array();
      for (double v : row) r.push_back(serial_num(v));
      rows.push_back(std::move(r));
    }
    j["B"] = std::move(rows);
  }
  return j.dump(2) + "\n";
}

bool descriptors_equal(const SystemDescriptor& a, const SystemDescriptor& b) {
  return a.n == b.n && a.directed == b.directed && a.mode == b.mode &&
         a.form == b.form && a.A == b.A && a.leaders == b.leaders &&
         a.B == b.B;
}

namespace {

struct CommonOpts {
  std::string input;
  std::string batch_dir;
  std::string outfile;
  std::string mode_flag;
  double eps_flag = kDefaultEps;
  bool eps_set = false;
};

struct SimOpts {
  std::string x0_csv;
  double threshold = 1.0;
};

struct RunConfig {
  SystemDescriptor::Mode mode = SystemDescriptor::Mode::Float;
  double eps = kDefaultEps;
};

RunConfig resolve_config(SystemDescriptor::Mode file_mode,
                         const CommonOpts& opts) {
  RunConfig cfg;
  cfg.mode = file_mode;
  if (const char* env = std::getenv("HERD_MODE")) {
    std::string m = env;
    if (m == "float") cfg.mode = SystemDescriptor::Mode::Float;
    else if (m == "exact") cfg.mode = SystemDescriptor::Mode::Exact;
  }
  if (opts.mode_flag == "float") cfg.mode = SystemDescriptor::Mode::Float;
  else if (opts.mode_flag == "exact") cfg.mode = SystemDescriptor::Mode::Exact;
  cfg.eps = opts.eps_set ? opts.eps_flag : default_eps_from_env();
  return cfg;
}

// Leaders-first ordering used by the block commands: leader indices
// ascending, then the remaining nodes ascending.
std::vector<Index> leaders_first_order(Index n, const std::vector<Index>& L) {
  std::vector<char> is_leader(n, 0);
  for (Index l : L) is_leader[l] = 1;
  std::vector<Index> order(L.begin(), L.end());
  for (Index v = 0; v < n; ++v)
    if (!is_leader[v]) order.push_back(v);
  return order;
}

const std::vector<Index>& require_leaders(const SystemDescriptor& d,
                                          const char* cmd) {
  if (!d.leaders)
    throw ArgumentError(std::string(cmd) +
                        " needs the leader-set form of the input (a "
                        "'leaders' field, not an explicit B)");
  return *d.leaders;
}

template <class S>
std::pair<json, int> analyze_system(const std::string& cmd,
                                    const SystemDescriptor& desc,
                                    const std::string& display,
                                    const RunConfig& cfg, const SimOpts& sim) {
  json rep = base_report(cmd, display, scalar_traits<S>::name(), cfg.eps);
  Mat<S> A = system_matrix<S>(desc);

  if (cmd == "check") {
    Mat<S> B = input_matrix<S>(desc);
    Verdict<S> v = herdable(A, B, cfg.eps);
    attach_verdict(rep, v);
    return {rep, status_exit(v.status)};
  }

  if (cmd == "greedy") {
    Mat<S> B = input_matrix<S>(desc);
    Mat<S> R = reachability_matrix(A, B);
    EliminationTrace<S> trace;
    Verdict<S> v = greedy_check(R, cfg.eps, &trace);
    attach_verdict(rep, v);
    json stages = json::array();
    for (const auto& step : trace) {
      json st;
      st["column"] = static_cast<long long>(step.columns[0].first + 1);
      st["coefficient"] =
          num(scalar_traits<S>::to_double(step.columns[0].second));
      json rows = json::array();
      for (Index r : step.rows) rows.push_back(static_cast<long long>(r + 1));
      st["rows"] = std::move(rows);
      stages.push_back(std::move(st));
    }
    rep["stages"] = std::move(stages);
    return {rep, status_exit(v.status)};
  }

  if (cmd == "reduce") {
    const auto& L = require_leaders(desc, "reduce");
    const Index n = desc.n, m = static_cast<Index>(L.size());
    if (m >= n)
      throw PartitionError("reduce: every node is a leader; nothing to reduce");
    auto order = leaders_first_order(n, L);
    Mat<S> Ap = permute(A, order, order);
    auto blocks = block_partition(Ap, m);
    Verdict<S> full = herdable(Ap, leader_input_matrix<S>(n, m), cfg.eps);
    Verdict<S> reduced = herdable(blocks.A22, blocks.A21, cfg.eps);
    json border = json::array();
    for (Index v : order) border.push_back(static_cast<long long>(v + 1));
    rep["order"] = std::move(border);
    rep["blocks"] = {{"A11", mat_json(blocks.A11)},
                     {"A12", mat_json(blocks.A12)},
                     {"A21", mat_json(blocks.A21)},
                     {"A22", mat_json(blocks.A22)}};
    rep["full_status"] = status_name(full.status);
    rep["reduced_status"] = status_name(reduced.status);
    rep["equivalent"] = (full.status == reduced.status);
    rep["status"] = status_name(full.status);
    rep["detail"] = full.detail;
    if (full.certificate) rep["certificate"] = vec_json(*full.certificate);
    if (full.witness) {
      Vec<S> w(n);
      for (Index i = 0; i < n; ++i) w[order[i]] = (*full.witness)[i];
      rep["witness"] = vec_json(w);
    }
    return {rep, status_exit(full.status)};
  }

  if (cmd == "layers") {
    const auto& L = require_leaders(desc, "layers");
    auto g = graph_from_matrix(A, /*directed=*/true, cfg.eps);
    auto ld = layer_decomposition(g, L);
    json leaders = json::array();
    for (Index l : ld.leaders) leaders.push_back(static_cast<long long>(l + 1));
    json layers = json::array();
    json order = json::array();
    for (Index l : ld.leaders) order.push_back(static_cast<long long>(l + 1));
    for (const auto& layer : ld.layers) {
      json one = json::array();
      for (Index v : layer) {
        one.push_back(static_cast<long long>(v + 1));
        order.push_back(static_cast<long long>(v + 1));
      }
      layers.push_back(std::move(one));
    }
    rep["leaders"] = std::move(leaders);
    rep["layers"] = std::move(layers);
    rep["depth"] = ld.depth;
    rep["canonical_order"] = std::move(order);
    return {rep, 0};
  }

  if (cmd == "tree-leader") {
    if (desc.directed)
      throw ArgumentError("tree-leader needs an undirected system");
    auto found = select_leader(A, cfg.eps);
    if (!found) {
      rep["leader"] = nullptr;
      rep["status"] = status_name(Status::Unknown);
      rep["detail"] =
          "no root expands through sign-uniform frontiers on this tree";
      return {rep, 2};
    }
    rep["leader"] = static_cast<long long>(found->first + 1);
    attach_verdict(rep, found->second);
    return {rep, status_exit(found->second.status)};
  }

  if (cmd == "tree-check") {
    if (desc.directed)
      throw ArgumentError("tree-check needs an undirected system");
    const auto& L = require_leaders(desc, "tree-check");
    if (L.size() != 1)
      throw ArgumentError("tree-check needs exactly one leader");
    TreeSystem<S> tree = validate_tree(A, L[0], cfg.eps);
    Verdict<S> v;
    const char* test = nullptr;
    if (tree.layers.depth <= 1) {
      v = depth1_exact_check(tree, cfg.eps);
      test = "exact-depth-1";
    } else if (tree.layers.depth == 2) {
      v = depth2_exact_check(tree, cfg.eps);
      test = "exact-depth-2";
    } else {
      v = layer_sign_check(tree, cfg.eps);
      test = "boundary-signs";
    }
    rep["depth"] = tree.layers.depth;
    rep["test"] = test;
    attach_verdict(rep, v);
    return {rep, status_exit(v.status)};
  }

  if (cmd == "simulate") {
    Mat<S> B = input_matrix<S>(desc);
    Vec<S> x0 = Vec<S>::Zero(desc.n);
    if (!sim.x0_csv.empty()) {
      auto parts = split(sim.x0_csv, ',');
      if (static_cast<Index>(parts.size()) != desc.n)
        throw ArgumentError("simulate: --x0 needs " + std::to_string(desc.n) +
                            " comma-separated values");
      for (Index i = 0; i < desc.n; ++i)
        x0[i] = scalar_traits<S>::from_double(
            parse_strict_double(parts[i], "--x0"));
    }
    S h = scalar_traits<S>::from_double(sim.threshold);
    rep["threshold"] = num(sim.threshold);
    try {
      HerdingPlan<S> plan = synthesize_plan(A, B, x0, h, cfg.eps);
      rep["status"] = status_name(Status::Herdable);
      rep["horizon"] = static_cast<long long>(plan.horizon);
      json inputs = json::array();
      for (const auto& u : plan.inputs) inputs.push_back(vec_json(u));
      rep["inputs"] = std::move(inputs);
      rep["final_state"] = vec_json(plan.final_state);
      rep["detail"] = "plan drives every component to the threshold";
      return {rep, 0};
    } catch (const NotHerdableError& e) {
      Verdict<S> v = herdable(A, B, cfg.eps);
      rep["status"] = status_name(Status::NotHerdable);
      rep["detail"] = e.what();
      if (v.witness) rep["witness"] = vec_json(*v.witness);
      return {rep, 1};
    }
  }

  throw ArgumentError("unhandled command '" + cmd + "'");
}

template <class S>
std::pair<json, int> analyze_diagonal(const DiagonalDescriptor& d,
                                      const std::string& display,
                                      const RunConfig& cfg) {
  json rep = base_report("diag", display, scalar_traits<S>::name(), cfg.eps);
  const Index n = static_cast<Index>(d.lambda.size());
  Vec<S> lambda(n), gamma(n);
  for (Index i = 0; i < n; ++i) {
    lambda[i] = scalar_traits<S>::from_double(d.lambda[i]);
    gamma[i] = scalar_traits<S>::from_double(d.gamma[i]);
  }
  Verdict<S> v = diagonal_pair_herdable(lambda, gamma, cfg.eps);
  attach_verdict(rep, v);
  return {rep, status_exit(v.status)};
}

std::pair<json, int> run_one_file(const std::string& cmd,
                                  const std::string& path,
                                  const std::string& display,
                                  const CommonOpts& opts, const SimOpts& sim) {
  std::string text = read_file(path);
  if (cmd == "diag") {
    DiagonalDescriptor d = parse_diagonal(text, display);
    RunConfig cfg = resolve_config(d.mode, opts);
    if (cfg.mode == SystemDescriptor::Mode::Exact) {
      for (double v : d.lambda)
        if (!integral_double(v))
          throw ParseError("exact mode requires integer diagonal values");
      for (double v : d.gamma)
        if (!integral_double(v))
          throw ParseError("exact mode requires integer input values");
    }
    return cfg.mode == SystemDescriptor::Mode::Exact
               ? analyze_diagonal<Rational>(d, display, cfg)
               : analyze_diagonal<double>(d, display, cfg);
  }
  SystemDescriptor desc = parse_system(text, display);
  RunConfig cfg = resolve_config(desc.mode, opts);
  if (cfg.mode == SystemDescriptor::Mode::Exact) require_integral(desc);
  return cfg.mode == SystemDescriptor::Mode::Exact
             ? analyze_system<Rational>(cmd, desc, display, cfg, sim)
             : analyze_system<double>(cmd, desc, display, cfg, sim);
}

void emit(const json& rep, const CommonOpts& opts, std::ostream& out,
          std::ostream& err) {
  std::string text = rep.dump(2) + "\n";
  if (!opts.outfile.empty()) {
    std::ofstream f(opts.outfile, std::ios::binary);
    if (!f) {
      err << "cannot write '" << opts.outfile << "'\n";
      throw ParseError("cannot write '" + opts.outfile + "'");
    }
    f << text;
  } else {
    out << text;
  }
}

int run_batch(const std::string& cmd, const CommonOpts& opts,
              const SimOpts& sim, std::ostream& out, std::ostream& err) {
  namespace fs = std::filesystem;
  std::vector<std::pair<std::string, std::string>> files;  // (name, path)
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(opts.batch_dir, ec)) {
    if (!entry.is_regular_file()) continue;
    std::string name = entry.path().filename().string();
    std::string ext = entry.path().extension().string();
    if (ext == ".json" || ext == ".edges")
      files.emplace_back(name, entry.path().string());
  }
  if (ec) {
    err << "cannot read directory '" << opts.batch_dir << "': " << ec.message()
        << "\n";
    return 65;
  }
  std::sort(files.begin(), files.end());
  json combined;
  combined["schema"] = kSchema;
  combined["batch"] = true;
  combined["command"] = cmd;
  json reports = json::object();
  bool any_error = false;
  for (const auto& [name, path] : files) {
    try {
      reports[name] = run_one_file(cmd, path, name, opts, sim).first;
    } catch (const std::exception& e) {
      reports[name] = json{{"error", e.what()}};
      any_error = true;
    }
  }
  combined["reports"] = std::move(reports);
  emit(combined, opts, out, err);
  return any_error ? 3 : 0;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out,
                std::ostream& err) {
  CLI::App app{"herdability analysis for linear ensemble systems"};
  app.name("herdkit");
  app.require_subcommand(1);

  struct SubSpec {
    CLI::App* sub;
    CommonOpts opts;
    SimOpts sim;
  };
  std::map<std::string, SubSpec> subs;
  auto add_sub = [&](const std::string& name, const std::string& desc) {
    CLI::App* sub = app.add_subcommand(name, desc);
    auto& spec = subs[name];
    spec.sub = sub;
    sub->add_option("input", spec.opts.input, "system description file");
    sub->add_option("--batch", spec.opts.batch_dir,
                    "process every .json/.edges file in a directory");
    sub->add_option("--out", spec.opts.outfile,
                    "write the report to this file instead of stdout");
    sub->add_option("--mode", spec.opts.mode_flag,
                    "arithmetic mode (float or exact)")
        ->check(CLI::IsMember({"float", "exact"}));
    sub->add_option("--eps", spec.opts.eps_flag,
                    "zero threshold for sign decisions")
        ->check(CLI::NonNegativeNumber);
    return sub;
  };

  add_sub("check", "decide herdability of the pair (A, B)");
  add_sub("greedy", "run the greedy unisigned-column elimination");
  add_sub("reduce", "expose the follower-subsystem reduction");
  add_sub("layers", "report the distance-layer decomposition");
  add_sub("tree-leader", "search an undirected tree for a herding root");
  add_sub("tree-check", "run the depth-dispatched tree tests");
  CLI::App* sim_sub =
      add_sub("simulate", "synthesize and replay a herding input plan");
  add_sub("diag", "decide a diagonal system with one input column");
  sim_sub->add_option("--threshold", subs["simulate"].sim.threshold,
                      "componentwise target level");
  sim_sub->add_option("--x0", subs["simulate"].sim.x0_csv,
                      "initial state as comma-separated values");

  std::vector<std::string> argv_store;
  argv_store.push_back("herdkit");
  for (const auto& a : args) argv_store.push_back(a);
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e, out, err);
    return rc == 0 ? 0 : 64;
  }

  CLI::App* picked = app.get_subcommands().front();
  const std::string cmd = picked->get_name();
  auto& spec = subs[cmd];
  spec.opts.eps_set = picked->count("--eps") > 0;

  try {
    if (!spec.opts.batch_dir.empty()) {
      if (!spec.opts.input.empty()) {
        err << "give either an input file or --batch, not both\n";
        return 64;
      }
      return run_batch(cmd, spec.opts, spec.sim, out, err);
    }
    if (spec.opts.input.empty()) {
      err << "an input file (or --batch) is required\n";
      return 64;
    }
    auto [rep, code] =
        run_one_file(cmd, spec.opts.input, spec.opts.input, spec.opts, spec.sim);
    emit(rep, spec.opts, out, err);
    return code;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << "\n";
    return 70;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 65;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 70;
  }
}

}  // namespace herd
