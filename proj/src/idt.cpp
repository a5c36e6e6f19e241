#include "acme/idt.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace acme {

namespace {

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  return s.substr(i);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

bool parse_double(const std::string& s, double& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  auto [ptr, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && ptr == e;
}

std::string fmt_time(double t) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", t);
  return buf;
}

// SplitMix64; one independent stream per carcass keyed on (seed, index).
struct SplitMix64 {
  std::uint64_t state;
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  double uniform() {  // in [0, 1)
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }
};

}  // namespace

ParseError::ParseError(std::vector<std::string> issues)
    : std::runtime_error(issues.empty() ? "parse error"
                                        : issues.front() +
                              (issues.size() > 1
                                   ? " (+" + std::to_string(issues.size() - 1) + " more)"
                                   : "")),
      issues_(std::move(issues)) {}

IdtDataset parse_dataset(std::istream& carcass_source, std::istream& search_source) {
  std::vector<std::string> issues;
  IdtDataset ds;
  std::map<std::string, std::size_t> index;

  std::string line;
  int lineno = 0;
  bool header_seen = false;
  while (std::getline(carcass_source, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    if (!header_seen) {
      header_seen = true;
      if (split_csv(line) != std::vector<std::string>{"id", "species", "t0", "tp", "ta"})
        issues.push_back("carcasses line 1: expected header id,species,t0,tp,ta");
      continue;
    }
    auto f = split_csv(line);
    if (f.size() != 5) {
      issues.push_back("carcasses line " + std::to_string(lineno) + ": expected 5 fields");
      continue;
    }
    CarcassRecord rec;
    rec.id = f[0];
    rec.species = f[1];
    double ta = 0.0;
    if (!parse_double(f[2], rec.t0) || !parse_double(f[3], rec.tp)) {
      issues.push_back("carcasses line " + std::to_string(lineno) + ": malformed number");
      continue;
    }
    if (!f[4].empty()) {
      if (!parse_double(f[4], ta)) {
        issues.push_back("carcasses line " + std::to_string(lineno) + ": malformed ta");
        continue;
      }
      rec.ta = ta;
    }
    if (rec.tp < rec.t0) {
      issues.push_back("carcasses line " + std::to_string(lineno) + ": tp < t0 for id " + rec.id);
      continue;
    }
    if (rec.ta && *rec.ta <= rec.tp) {
      issues.push_back("carcasses line " + std::to_string(lineno) + ": ta <= tp for id " + rec.id);
      continue;
    }
    if (index.count(rec.id)) {
      issues.push_back("carcasses line " + std::to_string(lineno) + ": duplicate id " + rec.id);
      continue;
    }
    index[rec.id] = ds.carcasses.size();
    ds.carcasses.push_back(std::move(rec));
  }
  if (!header_seen) issues.push_back("carcasses: empty input");

  // Collect searches grouped by carcass, preserving file order within group.
  std::vector<std::vector<SearchRecord>> grouped(ds.carcasses.size());
  lineno = 0;
  header_seen = false;
  while (std::getline(search_source, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    if (!header_seen) {
      header_seen = true;
      if (split_csv(line) != std::vector<std::string>{"carcass_id", "search_time", "discovered"})
        issues.push_back("searches line 1: expected header carcass_id,search_time,discovered");
      continue;
    }
    auto f = split_csv(line);
    if (f.size() != 3) {
      issues.push_back("searches line " + std::to_string(lineno) + ": expected 3 fields");
      continue;
    }
    auto it = index.find(f[0]);
    if (it == index.end()) {
      issues.push_back("searches line " + std::to_string(lineno) + ": unknown carcass_id " + f[0]);
      continue;
    }
    SearchRecord sr;
    sr.carcass_id = f[0];
    if (!parse_double(f[1], sr.time)) {
      issues.push_back("searches line " + std::to_string(lineno) + ": malformed search_time");
      continue;
    }
    if (f[2] != "0" && f[2] != "1") {
      issues.push_back("searches line " + std::to_string(lineno) + ": discovered must be 0 or 1");
      continue;
    }
    sr.discovered = (f[2] == "1");
    auto& group = grouped[it->second];
    if (!group.empty() && sr.time <= group.back().time) {
      issues.push_back("searches line " + std::to_string(lineno) +
                       ": non-monotone search times for carcass " + f[0]);
      continue;
    }
    group.push_back(std::move(sr));
  }

  if (!issues.empty()) throw ParseError(std::move(issues));

  for (std::size_t i = 0; i < grouped.size(); ++i) {
    const auto& c = ds.carcasses[i];
    std::size_t lo = ds.searches.size();
    for (auto& sr : grouped[i]) {
      sr.excluded = (sr.time < c.t0 || sr.time > c.tp);
      if (sr.excluded) ++ds.n_excluded_searches;
      ds.searches.push_back(std::move(sr));
    }
    ds.search_ranges.emplace_back(lo, ds.searches.size());
  }
  return ds;
}

void write_carcasses_csv(const IdtDataset& ds, std::ostream& out) {
  out << "id,species,t0,tp,ta\n";
  for (const auto& c : ds.carcasses) {
    out << c.id << ',' << c.species << ',' << fmt_time(c.t0) << ',' << fmt_time(c.tp) << ',';
    if (c.ta) out << fmt_time(*c.ta);
    out << '\n';
  }
}

void write_searches_csv(const IdtDataset& ds, std::ostream& out) {
  out << "carcass_id,search_time,discovered\n";
  for (const auto& s : ds.searches)
    out << s.carcass_id << ',' << fmt_time(s.time) << ',' << (s.discovered ? '1' : '0') << '\n';
}

SimulatedIdt simulate_idt(const AcmeParams& params, int n_carcasses,
                          double placement_window, std::span<const double> search_times,
                          std::uint64_t seed, const SimulationOptions& opts) {
  params.validate();
  if (n_carcasses < 1) throw std::domain_error("simulate_idt: n_carcasses must be >= 1");
  if (!(placement_window > 0.0))
    throw std::domain_error("simulate_idt: placement_window must be > 0");
  if (search_times.empty()) throw std::domain_error("simulate_idt: empty search schedule");
  for (std::size_t i = 1; i < search_times.size(); ++i)
    if (!(search_times[i] > search_times[i - 1]))
      throw std::domain_error("simulate_idt: search times must be strictly increasing");
  if (!(opts.pfm_cadence > 0.0)) throw std::domain_error("simulate_idt: pfm_cadence must be > 0");

  const double trial_end = search_times.back();
  const double alpha = params.removal.alpha;
  const double rho = params.removal.rho;

  SimulatedIdt sim;
  sim.data.carcasses.reserve(n_carcasses);
  sim.removal_time.reserve(n_carcasses);

  for (int i = 0; i < n_carcasses; ++i) {
    SplitMix64 rng{seed ^ (0xD1B54A32D192ED03ULL * static_cast<std::uint64_t>(i + 1))};
    const double t0 = placement_window * rng.uniform();
    // Weibull(alpha, rho) removal time via inverse CDF.
    const double u = rng.uniform();
    const double tau = std::pow(-std::log1p(-u), 1.0 / alpha) / rho;
    const double removal = t0 + tau;

    CarcassRecord rec;
    rec.id = "c" + std::to_string(i);
    rec.species = "SIM";
    rec.t0 = t0;

    std::size_t lo = sim.data.searches.size();
    bool discoverable = true;
    bool ever = false;
    bool first = false;
    bool first_seen = false;
    double last_discovery = -1.0;
    for (double T : search_times) {
      if (T < t0) continue;
      const bool present = T < removal;
      bool found = false;
      if (present && discoverable) {
        const double page = proficiency(params.discovery, T - t0);
        found = rng.uniform() < page;
      }
      if (present) {
        // One bleed-through coin after every search of a present carcass.
        if (rng.uniform() >= params.bleed) discoverable = false;
      }
      if (!first_seen) {
        first_seen = true;
        first = found;
      }
      if (found) {
        ever = true;
        last_discovery = T;
      }
      sim.data.searches.push_back({rec.id, T, found, false});
    }

    // Presence checks every pfm_cadence days after placement, up to trial end.
    double last_present_check = t0;
    std::optional<double> first_absent_check;
    for (double tc = t0 + opts.pfm_cadence; tc <= trial_end; tc += opts.pfm_cadence) {
      if (tc < removal) {
        last_present_check = tc;
      } else {
        first_absent_check = tc;
        break;
      }
    }
    rec.tp = std::max(last_present_check, last_discovery);
    rec.ta = first_absent_check;

    for (std::size_t s = lo; s < sim.data.searches.size(); ++s) {
      auto& sr = sim.data.searches[s];
      sr.excluded = (sr.time < rec.t0 || sr.time > rec.tp);
      if (sr.excluded) ++sim.data.n_excluded_searches;
    }
    sim.data.search_ranges.emplace_back(lo, sim.data.searches.size());
    sim.data.carcasses.push_back(std::move(rec));
    sim.removal_time.push_back(removal);
    sim.ever_discovered.push_back(ever ? 1 : 0);
    sim.first_search_discovered.push_back(first ? 1 : 0);
  }
  return sim;
}

}  // namespace acme
