#include "pforge/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "pforge/acceptance.hpp"
#include "pforge/constructions.hpp"
#include "pforge/error.hpp"
#include "pforge/serialize.hpp"
#include "pforge/transport.hpp"

namespace pforge {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  return out;
}

// dyadic:L:I | cylinder:STEM | range:A:B
SetExprPtr parse_set(const std::string& text) {
  auto f = split(text, ':');
  if (f.size() == 3 && f[0] == "dyadic") return dyadic(std::stoi(f[1]), Integer(f[2]));
  if (f.size() == 2 && f[0] == "cylinder") return cylinder(f[1]);
  if (f.size() == 1 && f[0] == "cylinder") return cylinder("");
  if (f.size() == 3 && f[0] == "range") return make_set(IndexRange{Integer(f[1]), Integer(f[2])});
  throw Error(ErrorCode::ParseError, "bad set '" + text + "' (dyadic:L:I, cylinder:STEM or range:A:B)");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
  f << text;
}

std::string dump_file(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

struct BuildArgs {
  std::string space = "unit-interval";
  std::string p;
  std::string kind;
  std::size_t count = 1;
  std::optional<std::uint64_t> horizon;
  std::vector<std::string> generators;
  std::string thetas;
  std::string poly;
  std::vector<std::string> parts;
  std::string params;
  std::string out;
};

std::vector<Witness> do_build(const BuildArgs& a) {
  if (!a.params.empty()) {
    nlohmann::json j = nlohmann::json::parse(read_file(a.params));
    std::vector<Witness> ws;
    if (j.is_array())
      for (const auto& e : j) ws.push_back(rebuild_any(e));
    else
      ws.push_back(rebuild_any(j));
    return ws;
  }
  if (a.p.empty() || a.kind.empty()) throw Error(ErrorCode::InvalidArgument, "--p and --kind are required");
  SpaceModel space = SpaceModel::parse(a.space);
  Rational p = parse_rational(a.p);
  BuildOptions opts;
  if (a.horizon) opts.horizon = *a.horizon;
  if (a.kind == "hA") return {build_hA(space, p, std::nullopt, opts)};
  if (a.kind == "sp-basic") return build_basic_family(space, p, a.count, BasicMode::Sp, std::nullopt, opts);
  if (a.kind == "sp-prime") return build_basic_family(space, p, a.count, BasicMode::SpPrime, std::nullopt, opts);
  if (a.kind == "gB" || a.kind == "not-below-p") return {build_gB(space, p, std::nullopt, opts)};
  if (a.kind == "dense") {
    std::vector<DensePair> pairs;
    for (const auto& g : a.generators) {
      auto f = split(g, ',');
      if (f.size() != 3) throw Error(ErrorCode::ParseError, "--generator wants SET,N,SEED");
      pairs.push_back({parse_set(f[0]), std::stoull(f[1]), AlmostDisjointIndex::parse(f[2])});
    }
    if (pairs.empty()) throw Error(ErrorCode::InvalidArgument, "dense needs at least one --generator");
    return build_dense_generators(space, p, pairs, opts);
  }
  if (a.kind == "algebra") {
    std::vector<Integer> th;
    for (const auto& t : split(a.thetas, ',')) th.emplace_back(t);
    return {algebra_generator_eval(th, PolynomialExpr::parse(a.poly, th.size()), p, space, opts)};
  }
  if (a.kind == "simple") {
    std::vector<SimplePart> parts;
    for (const auto& s : a.parts) {
      auto eq = s.find('=');
      if (eq == std::string::npos) throw Error(ErrorCode::ParseError, "--part wants SET=VALUE");
      parts.push_back({parse_set(s.substr(0, eq)), parse_rational(s.substr(eq + 1))});
    }
    return {build_simple(space, p, std::move(parts))};
  }
  throw Error(ErrorCode::InvalidArgument, "unknown kind '" + a.kind + "'");
}

struct CertifyArgs {
  std::string file;
  std::string claim = "nowhere-lq";
  std::string q;
  std::uint64_t depth = 10;
  std::optional<std::size_t> member;
  std::string out;
};

std::vector<std::size_t> chosen_members(const std::optional<std::size_t>& member, std::size_t total) {
  if (member) {
    if (*member >= total) throw Error(ErrorCode::InvalidArgument, "member out of range");
    return {*member};
  }
  std::vector<std::size_t> all(total);
  for (std::size_t i = 0; i < total; ++i) all[i] = i;
  return all;
}

Report certify_one(const Witness& w, const CertifyArgs& a) {
  auto need_q = [&] {
    if (a.q.empty()) throw Error(ErrorCode::InvalidArgument, "--q is required for " + a.claim);
    return parse_rational(a.q);
  };
  if (a.claim == "nowhere-lq") return nowhere_report(w, Target{Target::Kind::Lq, need_q()}, a.depth);
  if (a.claim == "nowhere-linf") return nowhere_report(w, Target{Target::Kind::Linf, 0}, a.depth);
  if (a.claim == "in-lp") return p_report(w);
  if (a.claim == "global-lq") return global_divergence_report(w, need_q());
  throw Error(ErrorCode::InvalidArgument, "unknown claim '" + a.claim + "'");
}

// One CSV row per term of the truncation: the real-line hull of its set.
struct Row {
  Rational start;
  Rational end;
  std::string exact;
  double approx = 0;
};

std::string fmt_double(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

std::string normalizer_text(const Strand& s, const Rational& p) {
  Strand unit = s;
  unit.scale = ExactPosReal();
  unit.normalizer.reset();
  return "(sum_m " + q_mass_family(unit, p).describe() + ")^(-1/" + p.get_str() + ")";
}

void strand_rows(const Strand& s, const Rational& p, std::uint64_t terms, std::vector<Row>& rows, std::size_t& skipped) {
  std::optional<Enclosure> N;
  if (s.normalizer) N = s.normalizer->power(Rational(1));
  for (std::uint64_t m = 1; m <= terms; ++m) {
    std::string exact;
    double approx = 0;
    if (s.kind == StrandKind::GeometricP) {
      auto c = s.abs_coeff(m);
      if (!c) continue;
      exact = (s.sign < 0 ? "-" : "") + c->to_string();
      approx = s.sign * c->to_double();
    } else {
      auto v = s.factorial_value(m);
      if (!v || *v == 0) continue;
      ExactPosReal c = s.scale * ExactPosReal(abs(*v));
      exact = (*v < 0 ? "-" : "") + c.to_string();
      approx = (*v < 0 ? -1 : 1) * c.to_double();
    }
    if (N) {
      exact += " * " + normalizer_text(s, p);
      approx *= to_double(N->mid());
    }
    SetExprPtr set = s.term_set(m);
    if (const auto* piece = set->as<CarrierPiece>()) {
      auto [hlo, hhi] = interval_bounds(*piece->host);
      auto [c, d] = fat_cantor_stage_interval(hlo, hhi - hlo, piece->address);
      rows.push_back({c, d, exact, approx});
    } else if (const auto* r = set->as<RegionSlice>(); r && r->base.kind == RegionBase::Kind::UnitBlocks && !r->unbounded) {
      Integer first = floor_of(r->lo);
      Integer last = ceil_of(r->hi);
      for (Integer i = first; i < last; ++i) {
        Rational a = std::max<Rational>(r->lo, Rational(i));
        Rational b = std::min<Rational>(r->hi, Rational(i + 1));
        Rational base = Rational(r->base.offset + i * r->base.stride) - Rational(i);
        rows.push_back({base + a, base + b, exact, approx});
        if (rows.size() > (std::size_t{1} << 21)) throw Error(ErrorCode::BudgetExceeded, "export too large");
      }
    } else {
      ++skipped;
    }
  }
}

void simple_rows(const SetExprPtr& set, const Rational& value, std::vector<Row>& rows, std::size_t& skipped) {
  if (const auto* u = set->as<Union>()) {
    for (const auto& c : u->children) simple_rows(c, value, rows, skipped);
    return;
  }
  if (set->as<DyadicInterval>() || set->as<Cylinder>()) {
    auto [a, b] = interval_bounds(*set);
    rows.push_back({a, b, value.get_str(), to_double(value)});
  } else if (const auto* r = set->as<IndexRange>()) {
    rows.push_back({Rational(r->start), Rational(r->end), value.get_str(), to_double(value)});
  } else {
    ++skipped;
  }
}

std::string export_csv(const Witness& w, std::uint64_t depth, std::ostream& err) {
  if (w.space.kind() == ModelKind::Product) throw Error(ErrorCode::UnsupportedLeaf, "export covers one-dimensional models");
  std::vector<Row> rows;
  std::size_t skipped = 0;
  for (const auto& g : w.groups) {
    if (g.home && *g.home > depth) continue;
    std::uint64_t lim = g.count ? std::min(*g.count, depth) : depth;
    for (std::uint64_t l = 1; l <= lim; ++l) strand_rows(g.strand(l), w.p, depth, rows, skipped);
  }
  for (const auto& s : w.simple) simple_rows(s.set, s.value, rows, skipped);
  if (skipped) err << "export: skipped " << skipped << " terms without an interval picture\n";
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.start < b.start; });
  std::ostringstream os;
  os << "interval_start,interval_end,value_exact,value_approx\n";
  for (const auto& r : rows)
    os << r.start.get_str() << "," << r.end.get_str() << ",\"" << r.exact << "\"," << fmt_double(r.approx) << "\n";
  return os.str();
}

int classify(const Error& e, std::ostream& err) {
  err << "error: " << e.what() << "\n";
  switch (e.code()) {
    case ErrorCode::UnclassifiableFamily: return kExitUnclassifiable;
    case ErrorCode::SchemaMismatch: return kExitSchema;
    default: return kExitUsage;
  }
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"pathology-forge: certified witnesses for nowhere-integrable functions"};
  app.require_subcommand(1);

  BuildArgs b;
  auto* build = app.add_subcommand("build", "build witnesses and write their seeds");
  build->add_option("--space", b.space, "unit-interval | half-line | cantor | counting");
  build->add_option("--p", b.p, "exponent p (rational)");
  build->add_option("--kind", b.kind, "hA | sp-basic | sp-prime | gB | dense | algebra | simple");
  build->add_option("--count", b.count, "members of a basic family");
  build->add_option("--horizon", b.horizon, "deepest base index materialized");
  build->add_option("--generator", b.generators, "dense generator SET,N,SEED");
  build->add_option("--thetas", b.thetas, "algebra generators, e.g. 2,3");
  build->add_option("--poly", b.poly, "algebra polynomial, e.g. x0*x1 - 2*x0");
  build->add_option("--part", b.parts, "simple part SET=VALUE");
  build->add_option("--params", b.params, "JSON parameter object or array");
  build->add_option("--out", b.out, "output file (default stdout)");

  CertifyArgs c;
  auto* certify = app.add_subcommand("certify", "certify a claim about a witness file");
  certify->add_option("file", c.file)->required();
  certify->add_option("--claim", c.claim, "nowhere-lq | nowhere-linf | in-lp | global-lq");
  certify->add_option("--q", c.q, "exponent q");
  certify->add_option("--depth", c.depth, "explicit base-index depth");
  certify->add_option("--member", c.member, "member index (default all)");
  certify->add_option("--out", c.out, "report file (default stdout)");

  std::string ex_file, ex_format = "csv", ex_out;
  std::uint64_t ex_depth = 10;
  std::optional<std::size_t> ex_member;
  auto* exp = app.add_subcommand("export", "export a truncation as piecewise-constant rows");
  exp->add_option("file", ex_file)->required();
  exp->add_option("--depth", ex_depth, "truncation depth");
  exp->add_option("--format", ex_format, "csv");
  exp->add_option("--member", ex_member, "member index (default 0)");
  exp->add_option("--out", ex_out, "output file (default stdout)");

  std::string tr_file, tr_map, tr_out;
  auto* tr = app.add_subcommand("transport", "rewrite a witness along a measure-preserving map");
  tr->add_option("file", tr_file)->required();
  tr->add_option("--map", tr_map, "F | L | G | G-inverse | T | T-inverse")->required();
  tr->add_option("--out", tr_out, "output file (default stdout)");

  std::vector<int> only;
  auto* suite = app.add_subcommand("suite", "run the acceptance criteria");
  suite->add_option("--only", only, "criterion numbers to run");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*build) {
      auto ws = do_build(b);
      emit(dump_file(witness_file(ws)), b.out, out);
      return kExitOk;
    }
    if (*certify) {
      WitnessFile wf = parse_witness_file(read_file(c.file));
      std::vector<Report> reports;
      bool all = true;
      for (std::size_t k : chosen_members(c.member, wf.members.size())) {
        Witness w = rebuild_any(wf.members[k]);
        Report r = certify_one(w, c);
        r.witness_hash = wf.hash + "#" + std::to_string(k);
        all = all && r.granted;
        reports.push_back(std::move(r));
      }
      std::string text = dump_file(report_file(reports));
      emit(text, c.out, out);
      if (!c.out.empty() && c.out != "-")
        for (const auto& r : reports)
          out << r.witness_hash.substr(r.witness_hash.find('#')) << " " << r.claim << " "
              << (r.granted ? "granted" : "denied: " + r.reason) << "\n";
      return all ? kExitOk : kExitDenied;
    }
    if (*exp) {
      if (ex_format != "csv") throw Error(ErrorCode::InvalidArgument, "only csv export is supported");
      WitnessFile wf = parse_witness_file(read_file(ex_file));
      std::size_t k = ex_member.value_or(0);
      if (k >= wf.members.size()) throw Error(ErrorCode::InvalidArgument, "member out of range");
      emit(export_csv(rebuild_any(wf.members[k]), ex_depth, err), ex_out, out);
      return kExitOk;
    }
    if (*tr) {
      TransportTag tag = parse_transport_tag(tr_map);
      WitnessFile wf = parse_witness_file(read_file(tr_file));
      std::vector<Witness> moved;
      for (const auto& m : wf.members) moved.push_back(apply_transport(tag, rebuild_any(m)));
      emit(dump_file(witness_file(moved)), tr_out, out);
      return kExitOk;
    }
    if (*suite) {
      AcceptanceContext ctx;
      bool ok = true;
      std::vector<int> ids = only;
      if (ids.empty())
        for (int i = 1; i <= kCriteria; ++i) ids.push_back(i);
      for (int id : ids) {
        CriterionResult r = run_criterion(id, ctx);
        ok = ok && r.pass;
        out << format_result(r) << "\n" << std::flush;
      }
      return ok ? kExitOk : kExitDenied;
    }
  } catch (const Error& e) {
    return classify(e, err);
  } catch (const nlohmann::json::exception& e) {
    err << "error: bad JSON: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: bad number: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace pforge
