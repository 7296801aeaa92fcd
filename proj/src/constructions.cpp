#include "pforge/constructions.hpp"

#include <map>
#include <mutex>

#include "pforge/error.hpp"

namespace pforge {

using nlohmann::json;

// ---------------------------------------------------------------------------
// RSequence

RSequence RSequence::decreasing_default(const Rational& p) { return RSequence{p, Direction::Decreasing, 1, {}}; }

RSequence RSequence::increasing_default(const Rational& p) { return RSequence{p, Direction::Increasing, p / 2, {}}; }

Rational RSequence::at(std::uint64_t l) const {
  if (l == 0) throw Error(ErrorCode::InvalidArgument, "exponent indices start at 1");
  if (l <= prefix.size()) return prefix[l - 1];
  Rational step = offset / Rational(static_cast<unsigned long>(l));
  return direction == Direction::Decreasing ? Rational(p + step) : Rational(p - step);
}

std::optional<std::uint64_t> RSequence::first_reaching(const Rational& q) const {
  bool dec = direction == Direction::Decreasing;
  if (dec ? q <= p : q >= p) return std::nullopt;
  for (std::size_t i = 0; i < prefix.size(); ++i)
    if (dec ? prefix[i] <= q : prefix[i] >= q) return i + 1;
  // p + offset/l <= q  <=>  l >= offset/(q - p); likewise for the increasing side.
  Integer l = ceil_of(offset / (dec ? Rational(q - p) : Rational(p - q)));
  std::uint64_t k = prefix.size() + 1;
  if (l > k) k = l.get_ui();
  return k;
}

void RSequence::validate() const {
  auto bad = [](const std::string& msg) { throw Error(ErrorCode::InvalidRSequence, msg); };
  if (p <= 0) bad("p must be positive");
  if (offset <= 0) bad("offset must be positive");
  bool dec = direction == Direction::Decreasing;
  std::size_t k = prefix.size();
  if (!dec && at(k + 1) <= 0) bad("exponents must stay positive");
  for (std::size_t i = 0; i < k; ++i) {
    const Rational& r = prefix[i];
    if (dec ? r <= p : (r >= p || r <= 0))
      bad("r_" + std::to_string(i + 1) + " = " + r.get_str() + " is on the wrong side of p");
    if (i > 0 && (dec ? r >= prefix[i - 1] : r <= prefix[i - 1]))
      bad("exponents are not strictly monotone at " + std::to_string(i + 1));
  }
  if (k > 0 && (dec ? at(k + 1) >= prefix.back() : at(k + 1) <= prefix.back()))
    bad("the formula part does not continue the prefix monotonically");
}

json RSequence::to_json() const {
  json j;
  j["direction"] = direction == Direction::Decreasing ? "decreasing" : "increasing";
  j["offset"] = offset.get_str();
  json pre = json::array();
  for (const auto& r : prefix) pre.push_back(r.get_str());
  j["prefix"] = pre;
  return j;
}

RSequence RSequence::from_json(const json& j, const Rational& p, Direction direction) {
  RSequence r = direction == Direction::Decreasing ? decreasing_default(p) : increasing_default(p);
  if (j.is_null()) return r;
  if (j.contains("direction")) {
    std::string d = j.at("direction").get<std::string>();
    if (d != "decreasing" && d != "increasing") throw Error(ErrorCode::ParseError, "bad r-sequence direction " + d);
    if ((d == "decreasing") != (direction == Direction::Decreasing))
      throw Error(ErrorCode::InvalidRSequence, "r-sequence runs the wrong way for this construction");
  }
  if (j.contains("offset")) r.offset = parse_rational(j.at("offset").get<std::string>());
  if (j.contains("prefix"))
    for (const auto& v : j.at("prefix")) r.prefix.push_back(parse_rational(v.get<std::string>()));
  return r;
}

// ---------------------------------------------------------------------------
// Strand factories

namespace {

std::mutex series_cache_mutex;
std::map<std::string, Enclosure> series_cache;

// sum over admitted m of m^-a * rho^m.
Enclosure raw_series(const Rational& a, const ExactPosReal& rho, const std::shared_ptr<const AlmostDisjointIndex>& filter,
                     const Rational& goal) {
  std::string key = a.get_str() + "|" + rho.to_string() + "|" + (filter ? filter->seed() : "") + "|" + goal.get_str();
  {
    std::lock_guard<std::mutex> lock(series_cache_mutex);
    auto it = series_cache.find(key);
    if (it != series_cache.end()) return it->second;
  }
  MassFamily f;
  f.kind = StrandKind::GeometricP;
  f.q = 1;
  f.C = ExactPosReal();
  f.a = a;
  f.rho = rho;
  f.filter = filter;
  Enclosure e = mass_enclosure(f, goal);
  std::lock_guard<std::mutex> lock(series_cache_mutex);
  series_cache.emplace(key, e);
  return e;
}

// Coefficients with c_m^r * B gamma^m = 1/m: A = B^(-1/r), alpha = 1/r,
// delta = gamma^(-1/r).
Strand geometric_strand(const Rational& p, const Rational& r, const Rational& B, const Rational& gamma,
                        const ExactPosReal& scale, std::shared_ptr<const AlmostDisjointIndex> filter,
                        Placement placement, const std::optional<Rational>& goal) {
  Strand s;
  s.kind = StrandKind::GeometricP;
  s.A = ExactPosReal::power(B, -1 / r);
  s.alpha = 1 / r;
  s.delta = ExactPosReal::power(gamma, -1 / r);
  s.B = B;
  s.gamma = gamma;
  s.scale = scale;
  s.filter = std::move(filter);
  s.placement = std::move(placement);
  if (goal) {
    Rational e = p / r;
    ExactPosReal rho = ExactPosReal::power(gamma, 1 - e);
    auto filter_ref = s.filter;
    Rational g = *goal;
    s.normalizer = Normalizer(p, ExactPosReal::power(B, 1 - e), [e, rho, filter_ref, g] { return raw_series(e, rho, filter_ref, g); });
  }
  return s;
}

Placement carrier_placement(SetExprPtr base) {
  Placement pl;
  pl.kind = Placement::Kind::Carrier;
  pl.base = std::move(base);
  return pl;
}

Placement region_placement(const RegionBase& region) {
  Placement pl;
  pl.kind = Placement::Kind::Region;
  pl.region = region;
  pl.region_start = 0;
  return pl;
}

ExactPosReal pow2_over(long e, const Rational& p) { return ExactPosReal::power(Rational(2), Rational(e) / p); }

Enclosure weighted_tail(const ExactPosReal& outer, const Rational& p, long exponent) {
  ExactPosReal w = outer.pow(p) * ExactPosReal(pow2(exponent));
  return w.is_rational() ? Enclosure::exact(w.scale()) : enclose(w, 80);
}

std::string unary_address(std::uint64_t l) { return std::string(l - 1, '1') + "0"; }

struct FGroupSpec {
  std::uint64_t n = 0;
  std::uint64_t carrier = 0;
  SetExprPtr host;
  Rational mass;
  ExactPosReal outer;
  std::shared_ptr<const AlmostDisjointIndex> filter;
  std::string id;
};

// Group n of an f function: strand l is the normalized h for r_l on the
// carrier piece 1^(l-1)0, weighted by outer * 2^(-(n+1+l)/p).
Group f_group(const FGroupSpec& spec, const Rational& p, const RSequence& r, const Rational& goal) {
  Group g;
  g.id = spec.id;
  g.home = spec.n;
  g.support = make_set(CarrierPiece{spec.carrier, spec.host, ""});
  g.strand = [spec, p, r, goal](std::uint64_t l) {
    Rational B = spec.mass * pow2(-static_cast<long>(l));
    SetExprPtr base = make_set(CarrierPiece{spec.carrier, spec.host, unary_address(l)});
    ExactPosReal scale = spec.outer * pow2_over(-static_cast<long>(spec.n + 1 + l), p);
    Strand s = geometric_strand(p, r.at(l), B, Rational(1, 2), scale, spec.filter, carrier_placement(base), goal);
    s.role = "h";
    s.label = spec.id + ".h" + std::to_string(l);
    return s;
  };
  g.tail_pmass = [spec, p](std::uint64_t L) {
    return weighted_tail(spec.outer, p, -static_cast<long>(spec.n + 1 + L));
  };
  g.select = [r](const Rational& q) { return r.first_reaching(q); };
  return g;
}

std::function<Strand(std::uint64_t)> f_generic(const Rational& p, const RSequence& r,
                                               std::shared_ptr<const AlmostDisjointIndex> filter) {
  return [p, r, filter](std::uint64_t l) {
    Strand s = geometric_strand(p, r.at(l), pow2(-static_cast<long>(l) - 1), Rational(1, 2), ExactPosReal(), filter,
                                Placement{}, std::nullopt);
    s.role = "h";
    s.label = "generic.h" + std::to_string(l);
    return s;
  };
}

const char* kFRule = "every base index n owns group n on a ledger carrier inside U_n (the ledger always finds free space)";

// Groups for one carrier per base index 0..horizon.
std::vector<Group> f_groups(const CarrierLedger& ledger, const std::vector<std::uint64_t>& carriers, const Rational& p,
                            const RSequence& r, const ExactPosReal& outer,
                            const std::shared_ptr<const AlmostDisjointIndex>& filter, const std::string& prefix,
                            const Rational& goal) {
  std::vector<Group> out;
  for (std::uint64_t c : carriers) {
    const CarrierRecord& rec = ledger.carriers().at(c);
    FGroupSpec spec{rec.base_index, rec.id, rec.host, rec.mass, outer, filter,
                    prefix + "n" + std::to_string(rec.base_index)};
    out.push_back(f_group(spec, p, r, goal));
  }
  return out;
}

json base_params(const std::string& construction, const SpaceModel& space, const Rational& p) {
  json j;
  j["construction"] = construction;
  j["space"] = space.name();
  j["p"] = p.get_str();
  return j;
}

void require_positive(const Rational& p) {
  if (p <= 0) throw Error(ErrorCode::InvalidArgument, "p must be positive");
}

void require_ledger_model(const SpaceModel& space) {
  auto k = space.kind();
  if (k != ModelKind::UnitInterval && k != ModelKind::HalfLine && k != ModelKind::Cantor)
    throw Error(ErrorCode::ModelMismatch, "carriers need the unit interval, the half-line or Cantor space, not " + space.name());
}

Witness make_f_witness(const SpaceModel& space, const Rational& p, std::vector<Group> groups, const RSequence& r,
                       const ExactPosReal& outer, const std::shared_ptr<const AlmostDisjointIndex>& filter,
                       std::uint64_t horizon) {
  Witness w;
  w.space = space;
  w.p = p;
  w.horizon = horizon;
  w.groups = std::move(groups);
  w.outer_tail = weighted_tail(outer, p, -static_cast<long>(horizon + 1));
  w.generic = f_generic(p, r, filter);
  w.uniform_rule = kFRule;
  return w;
}

}  // namespace

// ---------------------------------------------------------------------------
// Basic family and h_A

std::vector<Witness> build_basic_family(const SpaceModel& space, const Rational& p, std::size_t count, BasicMode mode,
                                        const std::optional<RSequence>& r_in, const BuildOptions& opts) {
  require_positive(p);
  require_ledger_model(space);
  if (count == 0) throw Error(ErrorCode::InvalidArgument, "count must be positive");
  if (mode == BasicMode::SpPrime && space.kind() != ModelKind::HalfLine)
    throw Error(ErrorCode::ModelMismatch, "the sp-prime family needs an infinite-measure model (half-line)");
  RSequence r = r_in.value_or(RSequence::decreasing_default(p));
  if (r.p != p || r.direction != RSequence::Direction::Decreasing)
    throw Error(ErrorCode::InvalidRSequence, "r-sequence must decrease to p");
  r.validate();
  RSequence rg = RSequence::increasing_default(p);

  CarrierLedger ledger(space);
  std::vector<std::vector<std::uint64_t>> carriers(count);
  for (std::uint64_t n = 0; n <= opts.horizon; ++n)
    for (std::size_t m = 0; m < count; ++m) carriers[m].push_back(ledger.allocate_within(n, pow2(-static_cast<long>(n) - 2)).id);

  ExactPosReal outer = mode == BasicMode::SpPrime ? pow2_over(-1, p) : ExactPosReal();
  std::vector<Witness> out;
  for (std::size_t m = 0; m < count; ++m) {
    std::string prefix = "f" + std::to_string(m + 1) + ".";
    Witness w = make_f_witness(space, p, f_groups(ledger, carriers[m], p, r, outer, nullptr, prefix, opts.normalizer_goal),
                               r, outer, nullptr, opts.horizon);
    w.kind = mode == BasicMode::SpPrime ? WitnessKind::SpPrime : WitnessKind::Sp;
    if (mode == BasicMode::SpPrime) {
      // Member m+1 owns the progression D = (2^m - 1) + 2^(m+1) i of the
      // complement; strand l uses the sub-progression (2^(l-1) - 1) + 2^l i of D.
      Integer d_off = (Integer(1) << m) - 1;
      Integer d_stride = Integer(1) << (m + 1);
      Group g;
      g.id = prefix + "g";
      g.support = make_set(RegionSlice{RegionBase{RegionBase::Kind::LedgerComplement, d_off, d_stride}, 0, 0, true});
      Rational goal = opts.normalizer_goal;
      g.strand = [p, rg, outer, d_off, d_stride, goal, id = g.id](std::uint64_t l) {
        Integer off = d_off + d_stride * ((Integer(1) << (l - 1)) - 1);
        Integer stride = d_stride * (Integer(1) << l);
        RegionBase region{RegionBase::Kind::LedgerComplement, off, stride};
        ExactPosReal scale = outer * pow2_over(-static_cast<long>(l), p);
        Strand s = geometric_strand(p, rg.at(l), Rational(1, 2), Rational(2), scale, nullptr, region_placement(region), goal);
        s.role = "g";
        s.label = id + std::to_string(l);
        return s;
      };
      g.tail_pmass = [outer, p](std::uint64_t L) { return weighted_tail(outer, p, -static_cast<long>(L)); };
      g.select = [rg](const Rational& q) { return rg.first_reaching(q); };
      w.groups.push_back(g);
    }
    json params = base_params("basic", space, p);
    params["mode"] = mode == BasicMode::SpPrime ? "sp-prime" : "sp";
    params["count"] = count;
    params["member"] = m;
    params["horizon"] = opts.horizon;
    params["r"] = r.to_json();
    w.params = params;
    assemble_witness(w, opts.assemble);
    out.push_back(std::move(w));
  }
  return out;
}

Witness build_hA(const SpaceModel& space, const Rational& p, const std::optional<RSequence>& r, const BuildOptions& opts) {
  Witness w = build_basic_family(space, p, 1, BasicMode::Sp, r, opts).front();
  json params = base_params("hA", space, p);
  params["horizon"] = opts.horizon;
  params["r"] = w.params["r"];
  w.params = params;
  return w;
}

// ---------------------------------------------------------------------------
// g_B

Witness build_gB(const SpaceModel& space, const Rational& p, const std::optional<RSequence>& r_in, const BuildOptions& opts) {
  require_positive(p);
  if (space.kind() != ModelKind::HalfLine && space.kind() != ModelKind::Counting)
    throw Error(ErrorCode::ModelMismatch, "g_B needs the half-line or the counting model, not " + space.name());
  RSequence r = r_in.value_or(RSequence::increasing_default(p));
  if (r.p != p || r.direction != RSequence::Direction::Increasing)
    throw Error(ErrorCode::InvalidRSequence, "r-sequence must increase to p");
  r.validate();
  Witness w;
  w.space = space;
  w.p = p;
  w.kind = WitnessKind::NotBelowP;
  Group g;
  g.id = "g";
  g.support = make_set(RegionSlice{RegionBase{RegionBase::Kind::UnitBlocks, 0, 1}, 0, 0, true});
  Rational goal = opts.normalizer_goal;
  g.strand = [p, r, goal](std::uint64_t l) {
    RegionBase region{RegionBase::Kind::UnitBlocks, (Integer(1) << (l - 1)) - 1, Integer(1) << l};
    Strand s = geometric_strand(p, r.at(l), Rational(1, 2), Rational(2), pow2_over(-static_cast<long>(l), p), nullptr,
                                region_placement(region), goal);
    s.role = "g";
    s.label = "g" + std::to_string(l);
    return s;
  };
  g.tail_pmass = [](std::uint64_t L) { return Enclosure::exact(pow2(-static_cast<long>(L))); };
  g.select = [r](const Rational& q) { return r.first_reaching(q); };
  w.groups.push_back(g);
  json params = base_params("gB", space, p);
  params["r"] = r.to_json();
  w.params = params;
  assemble_witness(w, opts.assemble);
  return w;
}

// ---------------------------------------------------------------------------
// Dense generators

namespace {

Witness dense_member(const CarrierLedger& ledger, const std::vector<std::uint64_t>& carriers, const SpaceModel& space,
                     const Rational& p, const DensePair& pair, const BuildOptions& opts) {
  RSequence r = RSequence::decreasing_default(p);
  auto filter = std::make_shared<const AlmostDisjointIndex>(pair.seed);
  ExactPosReal outer(Rational(1, static_cast<unsigned long>(pair.n)));
  std::string prefix = "a[" + pair.seed.seed() + "].";
  Witness w = make_f_witness(space, p, f_groups(ledger, carriers, p, r, outer, filter, prefix, opts.normalizer_goal), r,
                             outer, filter, opts.horizon);
  w.kind = WitnessKind::DenseGen;
  w.simple.push_back(SimplePart{pair.set, Rational(1)});
  json params = base_params("dense", space, p);
  params["set"] = set_to_json(*pair.set);
  params["n"] = pair.n;
  params["seed"] = pair.seed.seed();
  params["horizon"] = opts.horizon;
  w.params = params;
  assemble_witness(w, opts.assemble);
  return w;
}

}  // namespace

std::vector<Witness> build_dense_generators(const SpaceModel& space, const Rational& p, const std::vector<DensePair>& pairs,
                                            const BuildOptions& opts) {
  require_positive(p);
  require_ledger_model(space);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (pairs[i].n == 0) throw Error(ErrorCode::InvalidArgument, "n must be positive");
    if (pairs[i].seed.cut()) throw Error(ErrorCode::InvalidArgument, "generator seeds carry no block cut");
    for (std::size_t j = 0; j < i; ++j) pairs[i].seed.split_point(pairs[j].seed);
  }
  CarrierLedger ledger(space);
  std::vector<std::uint64_t> carriers;
  for (std::uint64_t n = 0; n <= opts.horizon; ++n) carriers.push_back(ledger.allocate_within(n, pow2(-static_cast<long>(n) - 2)).id);
  std::vector<Witness> out;
  for (const auto& pair : pairs) out.push_back(dense_member(ledger, carriers, space, p, pair, opts));
  return out;
}

Enclosure dense_deviation_norm(const Witness& g, const Rational& goal) {
  Enclosure pm = strands_pmass(g, goal / 4);
  int bits = 8 + static_cast<int>(std::ceil(-log2_of(goal)));
  return power_bounds(pm, 1 / g.p, bits);
}

DenseCombinationReport dense_combination_certify(const std::vector<std::pair<Rational, const Witness*>>& combo,
                                                 std::uint64_t depth, const std::vector<Rational>& exponents) {
  std::vector<std::size_t> live;
  for (std::size_t i = 0; i < combo.size(); ++i) {
    const Witness* w = combo[i].second;
    if (!w || w->kind != WitnessKind::DenseGen) throw Error(ErrorCode::InvalidArgument, "combination of dense generators only");
    if (combo[i].first != 0) live.push_back(i);
  }
  if (live.empty()) throw Error(ErrorCode::AllZero, "all coefficients are zero");
  const Rational p = combo.front().second->p;
  std::vector<AlmostDisjointIndex> seeds;
  for (const auto& [c, w] : combo) {
    if (w->p != p) throw Error(ErrorCode::InvalidArgument, "generators disagree on p");
    seeds.push_back(AlmostDisjointIndex::parse(w->params.at("seed").get<std::string>()));
  }
  DenseCombinationReport out;
  bool shared = false;
  for (std::size_t i = 0; i < seeds.size(); ++i)
    for (std::size_t j = 0; j < i; ++j) {
      std::size_t s = seeds[i].split_point(seeds[j]);
      out.cut_block = std::max(out.cut_block, seeds[i].derived(s));
      shared = true;
    }
  if (shared && out.cut_block <= 16) out.cut_index = AlmostDisjointIndex::block_start(out.cut_block + 1) - 1;

  // The first live generator's tail: beyond the cut no other generator uses
  // the same inner indices, so the combination equals b * f^seed / n there.
  std::size_t lead = live.front();
  const Witness& g = *combo[lead].second;
  Witness tail = g;
  tail.simple.clear();
  ExactPosReal bscale(abs(combo[lead].first));
  auto cut_filter = std::make_shared<const AlmostDisjointIndex>(
      shared ? seeds[lead].after_block(out.cut_block) : seeds[lead]);
  for (auto& grp : tail.groups) {
    auto inner = grp.strand;
    grp.strand = [inner, bscale, cut_filter](std::uint64_t l) {
      Strand s = inner(l);
      s.scale = bscale * s.scale;
      s.filter = cut_filter;
      s.normalizer.reset();
      return s;
    };
  }
  auto generic = g.generic;
  tail.generic = [generic, cut_filter](std::uint64_t l) {
    Strand s = generic(l);
    s.filter = cut_filter;
    return s;
  };
  tail.uniform_rule = g.uniform_rule + "; inner indices restricted to " + cut_filter->seed();
  out.tail = tail;

  std::vector<Rational> qs = exponents;
  if (qs.empty()) qs = {p * Rational(5, 4), p * Rational(3, 2), p * 2, p * 3};
  Report& rep = out.report;
  rep.claim = "InSp(" + p.get_str() + ")";
  rep.depth = depth;
  rep.granted = true;
  rep.uniform = true;
  for (std::size_t i : live) {
    Report pr = p_report(*combo[i].second);
    if (!pr.granted) {
      rep.granted = false;
      rep.reason = "generator " + std::to_string(i) + " fails p-integrability: " + pr.reason;
    }
  }
  for (const auto& q : qs) {
    if (q <= p) throw Error(ErrorCode::InvalidArgument, "exponents must exceed p");
    Report r = nowhere_report(tail, Target{Target::Kind::Lq, q}, depth);
    rep.verdicts.insert(rep.verdicts.end(), r.verdicts.begin(), r.verdicts.end());
    rep.granted = rep.granted && r.granted;
    rep.uniform = rep.uniform && r.uniform;
    if (!r.granted && rep.reason.empty()) rep.reason = r.claim + ": " + r.reason;
    out.per_exponent.push_back(std::move(r));
  }
  rep.uniform_rule = "simple part bounded; tail of generator " + std::to_string(lead) + " after harmonic block " +
                     std::to_string(out.cut_block) + " is disjoint from every other tail and nowhere L^q for each listed q";
  if (!out.per_exponent.empty()) rep.uniform_through = out.per_exponent.front().uniform_through;
  return out;
}

// ---------------------------------------------------------------------------
// Algebra

Witness algebra_generator_eval(const std::vector<Integer>& thetas, const PolynomialExpr& poly, const Rational& p,
                               const SpaceModel& space, const BuildOptions& opts) {
  require_positive(p);
  require_ledger_model(space);
  ExponentialSum es = evaluate_generators(thetas, poly);
  Witness w;
  w.space = space;
  w.p = p;
  w.kind = WitnessKind::AlgebraElement;
  w.horizon = opts.horizon;
  json params = base_params("algebra", space, p);
  json th = json::array();
  for (const auto& t : thetas) th.push_back(t.get_str());
  params["thetas"] = th;
  params["polynomial"] = poly.to_string();
  params["horizon"] = opts.horizon;
  w.params = params;
  if (es.is_zero()) {
    w.norm = Enclosure::exact(Rational(0));
    return w;
  }
  // B_j is the union over n of the pieces 1^(e_j)0 of carrier n, each of mass
  // (carrier mass / 2) * 2^-e_j.
  CarrierLedger ledger(space);
  auto make = [values = es.terms](const Rational& K, std::uint64_t carrier, SetExprPtr host, std::string label) {
    Strand s;
    s.kind = StrandKind::FactorialDyadic;
    s.values = values;
    s.K = K;
    s.scale = ExactPosReal();
    s.placement = carrier_placement(make_set(CarrierPiece{carrier, std::move(host), ""}));
    s.role = "w";
    s.label = std::move(label);
    return s;
  };
  for (std::uint64_t n = 0; n <= opts.horizon; ++n) {
    const CarrierRecord& rec = ledger.allocate_within(n, pow2(-static_cast<long>(n) - 2));
    Group g;
    g.id = "n" + std::to_string(n);
    g.home = n;
    g.support = make_set(CarrierPiece{rec.id, rec.host, ""});
    g.count = 1;
    Strand s = make(rec.mass / 2, rec.id, rec.host, g.id + ".w");
    g.strand = [s](std::uint64_t) { return s; };
    w.groups.push_back(g);
  }
  Strand unit = make(Rational(1), 0, make_set(DyadicInterval{0, 0}), "generic.w");
  w.generic = [unit](std::uint64_t) { return unit; };
  w.uniform_rule = kFRule;
  // The p-mass is of order exp(theta_1^p); past kAlgebraNormGrowth it is not
  // enclosed and the norm is flagged as uncertified.
  Integer lead = es.terms.front().second;
  if (ExactPosReal::power(Rational(lead), p) > ExactPosReal(Rational(kAlgebraNormGrowth))) {
    w.norm_certified = false;
  } else {
    // Carriers beyond the horizon have mass <= 2^(-n-2), hence K_n <= 2^(-n-3).
    Enclosure per_unit = mass_enclosure(q_mass_family(unit, p), pow2(-40));
    w.outer_tail = Enclosure{Rational(0), per_unit.hi * pow2(-static_cast<long>(opts.horizon) - 3), Rational(0)};
  }
  assemble_witness(w, opts.assemble);
  return w;
}

// ---------------------------------------------------------------------------
// Simple functions

Witness build_simple(const SpaceModel& space, const Rational& p, std::vector<SimplePart> parts) {
  require_positive(p);
  for (std::size_t i = 0; i < parts.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (!disjoint(*parts[i].set, *parts[j].set))
        throw Error(ErrorCode::DisjointnessViolation, "simple parts " + std::to_string(j) + " and " + std::to_string(i) + " overlap");
  Witness w;
  w.space = space;
  w.p = p;
  w.kind = WitnessKind::Simple;
  json params = base_params("simple", space, p);
  json arr = json::array();
  for (const auto& part : parts) arr.push_back({{"set", set_to_json(*part.set)}, {"value", part.value.get_str()}});
  params["parts"] = arr;
  w.params = params;
  w.simple = std::move(parts);
  assemble_witness(w);
  return w;
}

json set_to_json(const SetExpr& s) {
  if (const auto* d = s.as<DyadicInterval>()) return {{"dyadic", {d->level, d->index.get_str()}}};
  if (const auto* c = s.as<Cylinder>()) return {{"cylinder", c->stem}};
  if (const auto* r = s.as<IndexRange>()) return {{"range", {r->start.get_str(), r->end.get_str()}}};
  throw Error(ErrorCode::UnsupportedLeaf, "no JSON form for " + s.type_name());
}

SetExprPtr set_from_json(const json& j) {
  try {
    if (j.contains("dyadic")) return dyadic(j.at("dyadic").at(0).get<int>(), Integer(j.at("dyadic").at(1).get<std::string>()));
    if (j.contains("cylinder")) return cylinder(j.at("cylinder").get<std::string>());
    if (j.contains("range"))
      return make_set(IndexRange{Integer(j.at("range").at(0).get<std::string>()), Integer(j.at("range").at(1).get<std::string>())});
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("bad set: ") + e.what());
  }
  throw Error(ErrorCode::ParseError, "unknown set form " + j.dump());
}

// ---------------------------------------------------------------------------

Witness rebuild(const json& params) {
  try {
    std::string c = params.at("construction").get<std::string>();
    SpaceModel space = SpaceModel::parse(params.at("space").get<std::string>());
    Rational p = parse_rational(params.at("p").get<std::string>());
    BuildOptions opts;
    if (params.contains("horizon")) opts.horizon = params.at("horizon").get<std::uint64_t>();
    auto r_of = [&](RSequence::Direction d) {
      return RSequence::from_json(params.contains("r") ? params.at("r") : json(), p, d);
    };
    if (c == "hA") return build_hA(space, p, r_of(RSequence::Direction::Decreasing), opts);
    if (c == "basic") {
      std::string mode = params.at("mode").get<std::string>();
      if (mode != "sp" && mode != "sp-prime") throw Error(ErrorCode::ParseError, "unknown mode " + mode);
      auto family = build_basic_family(space, p, params.at("count").get<std::size_t>(),
                                       mode == "sp" ? BasicMode::Sp : BasicMode::SpPrime,
                                       r_of(RSequence::Direction::Decreasing), opts);
      return family.at(params.at("member").get<std::size_t>());
    }
    if (c == "gB") return build_gB(space, p, r_of(RSequence::Direction::Increasing), opts);
    if (c == "dense") {
      DensePair pair{set_from_json(params.at("set")), params.at("n").get<std::uint64_t>(),
                     AlmostDisjointIndex::parse(params.at("seed").get<std::string>())};
      return build_dense_generators(space, p, {pair}, opts).front();
    }
    if (c == "algebra") {
      std::vector<Integer> thetas;
      for (const auto& t : params.at("thetas")) thetas.emplace_back(t.get<std::string>());
      PolynomialExpr poly = PolynomialExpr::parse(params.at("polynomial").get<std::string>(), thetas.size());
      return algebra_generator_eval(thetas, poly, p, space, opts);
    }
    if (c == "simple") {
      std::vector<SimplePart> parts;
      for (const auto& e : params.at("parts"))
        parts.push_back(SimplePart{set_from_json(e.at("set")), parse_rational(e.at("value").get<std::string>())});
      return build_simple(space, p, std::move(parts));
    }
    throw Error(ErrorCode::ParseError, "unknown construction " + c);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("bad witness parameters: ") + e.what());
  }
}

}  // namespace pforge
