#include "unlearn/results_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace unlearn {

const char* const kResultsHeader =
    "loss_mode,mu,L,d,rf,seed,n_reps,e,kdp,t_scratch_mean,t_unlearn_mean,ratio,"
    "censored_scratch,censored_unlearn";

namespace {

void append_double(std::string& out, double v) {
  if (std::isinf(v)) {
    out += v > 0 ? "inf" : "-inf";
    return;
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

double parse_double_field(const std::string& tok, const std::string& where) {
  if (tok == "inf") return std::numeric_limits<double>::infinity();
  if (tok == "-inf") return -std::numeric_limits<double>::infinity();
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size())
    throw std::runtime_error(where + ": bad numeric field '" + tok + "'");
  return v;
}

std::vector<std::string> split_line(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace

std::string results_csv(const SweepMeta& meta, const std::vector<PhaseCell>& cells) {
  std::string out = kResultsHeader;
  out += '\n';
  for (const PhaseCell& c : cells) {
    out += meta.loss_mode;
    out += ',';
    append_double(out, meta.mu);
    out += ',';
    append_double(out, meta.lipschitz);
    out += ',';
    out += std::to_string(meta.dim);
    out += ',';
    append_double(out, meta.rf);
    out += ',';
    out += std::to_string(meta.seed);
    out += ',';
    out += std::to_string(meta.n_reps);
    out += ',';
    append_double(out, c.e);
    out += ',';
    append_double(out, c.kdp);
    out += ',';
    append_double(out, c.mean_t_scratch);
    out += ',';
    append_double(out, c.mean_t_unlearn);
    out += ',';
    append_double(out, c.ratio);
    out += ',';
    out += std::to_string(c.n_censored_scratch);
    out += ',';
    out += std::to_string(c.n_censored_unlearn);
    out += '\n';
  }
  return out;
}

void write_results_csv_atomic(const std::string& path, const SweepMeta& meta,
                              const std::vector<PhaseCell>& cells) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp + " for writing");
    out << results_csv(meta, cells);
    if (!out) throw std::runtime_error("write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("rename failed: " + tmp + " -> " + path);
}

ParsedResults parse_results_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_results_csv_text(ss.str(), path);
}

ParsedResults parse_results_csv_text(const std::string& text, const std::string& name) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(name + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const std::vector<std::string> want = split_line(kResultsHeader);
  const std::vector<std::string> have = split_line(line);
  for (const std::string& col : want) {
    if (std::find(have.begin(), have.end(), col) == have.end())
      throw std::runtime_error(name + ": missing column '" + col + "'");
  }
  std::vector<std::size_t> pos(want.size());
  for (std::size_t i = 0; i < want.size(); ++i)
    pos[i] = static_cast<std::size_t>(
        std::find(have.begin(), have.end(), want[i]) - have.begin());

  ParsedResults res;
  bool first = true;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> f = split_line(line);
    if (f.size() != have.size())
      throw std::runtime_error(name + ":" + std::to_string(lineno) + ": expected " +
                               std::to_string(have.size()) + " fields, got " +
                               std::to_string(f.size()));
    const std::string where = name + ":" + std::to_string(lineno);
    auto field = [&](std::size_t i) -> const std::string& { return f[pos[i]]; };
    if (first) {
      res.meta.loss_mode = field(0);
      res.meta.mu = parse_double_field(field(1), where);
      res.meta.lipschitz = parse_double_field(field(2), where);
      res.meta.dim = static_cast<std::size_t>(parse_double_field(field(3), where));
      res.meta.rf = parse_double_field(field(4), where);
      res.meta.seed = static_cast<std::uint64_t>(std::strtoull(field(5).c_str(), nullptr, 10));
      res.meta.n_reps = static_cast<std::uint64_t>(std::strtoull(field(6).c_str(), nullptr, 10));
      first = false;
    }
    PhaseCell c;
    c.e = parse_double_field(field(7), where);
    c.kdp = parse_double_field(field(8), where);
    c.mean_t_scratch = parse_double_field(field(9), where);
    c.mean_t_unlearn = parse_double_field(field(10), where);
    c.ratio = parse_double_field(field(11), where);
    c.n_censored_scratch =
        static_cast<std::uint64_t>(std::strtoull(field(12).c_str(), nullptr, 10));
    c.n_censored_unlearn =
        static_cast<std::uint64_t>(std::strtoull(field(13).c_str(), nullptr, 10));
    res.cells.push_back(c);
  }
  if (res.cells.empty()) throw std::runtime_error(name + ": no data rows");
  return res;
}

}  // namespace unlearn
