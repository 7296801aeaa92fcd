#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pforge/certify.hpp"
#include "pforge/series.hpp"

namespace pforge {

// A certificate together with the family it speaks about, kept for replay.
struct LoggedVerdict {
  std::string origin;
  MassFamily family;
  Verdict verdict;
};

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
  double seconds = 0;
};

struct AcceptanceContext {
  std::uint64_t seed = 20260401;
  // Every verdict met by criteria 1-7; criterion 8 replays them.
  std::vector<LoggedVerdict> log;
  // Extra oracle run on every divergent certificate of criterion 1 with the
  // threshold it must exceed; empty means the built-in floating-point oracle.
  std::function<bool(const MassFamily&, const Verdict&, const Rational& threshold, std::string& why)> divergence_oracle;
};

inline constexpr int kCriteria = 8;

CriterionResult run_criterion(int id, AcceptanceContext& ctx);
std::vector<CriterionResult> run_acceptance(AcceptanceContext& ctx);
std::string format_result(const CriterionResult& r);

// Adds the families behind every verdict of a report on w.
void log_report(AcceptanceContext& ctx, const std::string& origin, const Witness& w, const Report& r,
                const Target& target);

}  // namespace pforge
