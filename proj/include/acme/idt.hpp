#ifndef ACME_IDT_HPP
#define ACME_IDT_HPP

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "acme/reduction.hpp"

// Integrated Detection Trial data: carcass placements with presence/absence
// confirmations and blinded per-search outcomes.  Times are decimal days
// from study start.

namespace acme {

struct CarcassRecord {
  std::string id;
  std::string species;        // e.g. an AOU code
  double t0 = 0.0;            // placement time
  double tp = 0.0;            // last known presence, >= t0
  std::optional<double> ta;   // first confirmed absence (> tp); empty = censored
};

struct SearchRecord {
  std::string carcass_id;
  double time = 0.0;
  bool discovered = false;
  bool excluded = false;  // outside [t0, tp]; kept but not used in likelihoods
};

struct IdtDataset {
  std::vector<CarcassRecord> carcasses;
  // Grouped per carcass (same order as `carcasses`), each group sorted by time.
  std::vector<SearchRecord> searches;
  std::vector<std::pair<std::size_t, std::size_t>> search_ranges;  // per carcass
  std::size_t n_excluded_searches = 0;

  std::span<const SearchRecord> searches_for(std::size_t carcass_index) const {
    auto [lo, hi] = search_ranges.at(carcass_index);
    return {searches.data() + lo, hi - lo};
  }
};

/// Parse failure with per-row diagnostics.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(std::vector<std::string> issues);
  const std::vector<std::string>& issues() const { return issues_; }

 private:
  std::vector<std::string> issues_;
};

/// Parse and validate the two CSV sources (schemas: carcasses
/// `id,species,t0,tp,ta` with empty ta meaning censored, searches
/// `carcass_id,search_time,discovered`).  Rows violating invariants produce
/// itemized errors with line numbers; searches outside [t0, tp] are retained
/// but flagged excluded.
IdtDataset parse_dataset(std::istream& carcass_source, std::istream& search_source);

void write_carcasses_csv(const IdtDataset& ds, std::ostream& out);
void write_searches_csv(const IdtDataset& ds, std::ostream& out);

struct SimulationOptions {
  double pfm_cadence = 3.0;  // days between presence/absence checks
};

struct SimulatedIdt {
  IdtDataset data;
  // Per-carcass ground truth, for validation against model predictions.
  std::vector<double> removal_time;
  std::vector<char> ever_discovered;
  std::vector<char> first_search_discovered;
};

/// Generative counterpart of the detection model: uniform placement on
/// [0, placement_window), Weibull removal, per-search detection with
/// probability S(age) while the carcass is present and discoverable, and a
/// bleed-through coin (survives with probability `bleed`) flipped after
/// every search.  Presence/absence brackets come from checks every
/// `pfm_cadence` days after placement.  Deterministic given the seed; each
/// carcass draws from its own counter-based stream, so any evaluation order
/// yields the same dataset.
SimulatedIdt simulate_idt(const AcmeParams& params, int n_carcasses,
                          double placement_window, std::span<const double> search_times,
                          std::uint64_t seed, const SimulationOptions& opts = {});

}  // namespace acme

#endif
