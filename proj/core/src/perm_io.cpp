#include "mixcheck/perm_io.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "mixcheck/error.hpp"

namespace mixcheck {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  return in;
}

long parse_long(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(text, &used);
  } catch (const std::exception&) {
    throw ValidationError("malformed " + what + " '" + text + "'");
  }
  if (used != text.size()) throw ValidationError("malformed " + what + " '" + text + "'");
  return v;
}

}  // namespace

int PermDataset::n() const {
  if (!permutations.empty()) return permutations.front().size();
  if (auto v = header_long("n")) return static_cast<int>(*v);
  throw ValidationError("dataset has no permutations and no n= header");
}

std::optional<long> PermDataset::header_long(const std::string& key) const {
  auto it = header.find(key);
  if (it == header.end()) return std::nullopt;
  return parse_long(it->second, "header value for " + key);
}

void write_perm_file(std::ostream& out, const ShuffleScheme& scheme,
                     const std::vector<Permutation>& perms) {
  out << "# mixcheck permutation sample v1\n";
  out << "# n=" << scheme.n << " scheme=" << to_string(scheme.kind);
  if (scheme.kind == ShuffleKind::random_transpositions) out << " k=" << scheme.steps;
  out << " N=" << perms.size() << " seed=" << scheme.seed << "\n";
  for (const auto& p : perms) out << p.to_string() << "\n";
}

PermDataset read_perm_file(std::istream& in) {
  PermDataset ds;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      std::istringstream tokens(t.substr(1));
      std::string tok;
      while (tokens >> tok) {
        const auto eq = tok.find('=');
        if (eq != std::string::npos && eq > 0) ds.header[tok.substr(0, eq)] = tok.substr(eq + 1);
      }
      continue;
    }
    std::istringstream fields(t);
    std::vector<int> images;
    std::string f;
    while (fields >> f) {
      images.push_back(static_cast<int>(parse_long(f, "permutation entry on line " + std::to_string(line_no))));
    }
    try {
      ds.permutations.emplace_back(std::move(images));
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (ds.permutations.back().size() != ds.permutations.front().size()) {
      throw ValidationError("line " + std::to_string(line_no) + ": permutation size differs from first line");
    }
  }
  if (ds.permutations.empty()) throw ValidationError("permutation file contains no permutations");
  if (auto n = ds.header_long("n"); n && *n != ds.permutations.front().size()) {
    throw ValidationError("header n=" + std::to_string(*n) + " does not match permutation size");
  }
  return ds;
}

PermDataset read_perm_file(const std::string& path) {
  auto in = open_or_throw(path);
  return read_perm_file(in);
}

long Histogram::total() const {
  long t = 0;
  for (const auto& [v, c] : rows) t += c;
  return t;
}

long Histogram::sum_of_values() const {
  long s = 0;
  for (const auto& [v, c] : rows) s += v * c;
  return s;
}

std::vector<long> Histogram::dense_counts() const {
  long max_value = 0;
  for (const auto& [v, c] : rows) {
    if (v < 0) throw ValidationError("histogram values must be >= 0 for this analysis");
    max_value = std::max(max_value, v);
  }
  std::vector<long> out(static_cast<std::size_t>(max_value + 1), 0);
  for (const auto& [v, c] : rows) out[static_cast<std::size_t>(v)] += c;
  return out;
}

std::vector<long> Histogram::expand() const {
  std::vector<long> out;
  out.reserve(static_cast<std::size_t>(total()));
  for (const auto& [v, c] : rows) out.insert(out.end(), static_cast<std::size_t>(c), v);
  return out;
}

Histogram read_histogram_csv(std::istream& in, bool allow_empty) {
  std::map<long, long> acc;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto comma = t.find(',');
    if (comma == std::string::npos) {
      throw ValidationError("histogram line " + std::to_string(line_no) + ": expected value,count");
    }
    const auto a = trim(t.substr(0, comma));
    const auto b = trim(t.substr(comma + 1));
    if (line_no == 1 && a == "value") continue;
    const long v = parse_long(a, "histogram value");
    const long c = parse_long(b, "histogram count");
    if (c < 0) throw ValidationError("histogram counts must be >= 0");
    acc[v] += c;
  }
  Histogram h;
  for (const auto& [v, c] : acc) h.rows.emplace_back(v, c);
  if (h.total() == 0 && !allow_empty) throw ValidationError("histogram contains no observations");
  return h;
}

Histogram read_histogram_csv(const std::string& path, bool allow_empty) {
  auto in = open_or_throw(path);
  return read_histogram_csv(in, allow_empty);
}

void write_histogram_csv(std::ostream& out, const Histogram& h) {
  out << "value,count\n";
  for (const auto& [v, c] : h.rows) out << v << "," << c << "\n";
}

Histogram histogram_of(const std::vector<long>& values) {
  std::map<long, long> acc;
  for (long v : values) ++acc[v];
  Histogram h;
  for (const auto& [v, c] : acc) h.rows.emplace_back(v, c);
  return h;
}

bool looks_like_histogram(const std::string& path) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv") return true;
  auto in = open_or_throw(path);
  std::string line;
  while (std::getline(in, line)) {
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    return t.find(',') != std::string::npos;
  }
  return false;
}

}  // namespace mixcheck
