#pragma once

// Subcommand bodies. Each takes parsed options and output streams and returns
// the process exit code, so they can be driven from tests without a process.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "skewbound/bound_ladder.hpp"
#include "skewbound/io.hpp"
#include "skewbound/oracle.hpp"
#include "skewbound/random.hpp"
#include "skewbound/skew_moments.hpp"
#include "skewbound/verify.hpp"

namespace skewbound::cli {

enum ExitCode : int {
  kSuccess = 0,
  kPropertyFailure = 1,
  kValidationFailure = 2,
  kDegenerateInstance = 3,
};

inline constexpr const char* kExitCodeHelp =
    "Exit codes:\n"
    "  0  success\n"
    "  1  a verification property failed (offending seeds printed)\n"
    "  2  input validation failed\n"
    "  3  degenerate instance (H commutes with rho, or the level surface degenerates)\n";

inline int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ZeroFisherInformation:
    case ErrorCode::DegenerateSurface:
    case ErrorCode::RankSaturated:
      return kDegenerateInstance;
    default:
      return kValidationFailure;
  }
}

enum class Format { Json, Csv };

inline Format parse_format(const std::string& s) {
  if (s == "json") return Format::Json;
  if (s == "csv") return Format::Csv;
  throw Error(ErrorCode::InvalidArgument, "format must be json or csv, got " + s);
}

namespace detail {

inline std::string csv_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline void require_finite(const Json& j, const std::string& path = "report") {
  if (j.is_number_float() && !std::isfinite(j.get<double>()))
    throw Error(ErrorCode::NonFinite, path + " is not finite");
  if (j.is_object())
    for (const auto& [k, v] : j.items()) require_finite(v, path + "." + k);
  if (j.is_array())
    for (std::size_t i = 0; i < j.size(); ++i) require_finite(j[i], path + "[" + std::to_string(i) + "]");
}

/// Writes to `path` when non-empty, else to `out`.
inline void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
  f << text;
}

inline std::string label_or_default(const Instance& inst, const std::string& path) {
  return inst.label.empty() ? path : inst.label;
}

}  // namespace detail

/// Runs `body`, mapping library errors to exit codes with a one-line
/// diagnostic on `err`.
template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kValidationFailure;
  }
}

inline Json ladder_rows_json(const BoundLadder& ladder) {
  Json rows = Json::array();
  for (const auto& r : ladder.rows)
    rows.push_back({{"n", r.order},
                    {"D", r.determinant},
                    {"N", r.norm},
                    {"U", r.numerator},
                    {"term", r.term},
                    {"cumulative", r.cumulative}});
  return rows;
}

struct GeometryOptions {
  std::string instance;
  double t = 0.0;
  bool raw = false;
};

/// Geometry at ρ_t = e^{−iHt}ρ e^{iHt}. Unless `raw`, the estimator is first
/// made locally unbiased at ρ_t with tr(Tρ_t) = t.
inline Json geometry_json(const Instance& inst, double t, bool raw) {
  if (!inst.estimator)
    throw Error(ErrorCode::InvalidArgument, "geometry needs an estimator in the instance file");
  if (t < 0.0) throw Error(ErrorCode::InvalidArgument, "t must be non-negative");
  const HermitianOperator& h = inst.hamiltonian;
  const SqrtState xi_t = evolve(principal_sqrt(inst.state), h, t);
  const DensityMatrix rho_t = xi_t.squared();
  const SkewMomentTable table(h, xi_t, {2, true});
  GeometricReport g;
  if (raw) {
    g = estimation_angle(*inst.estimator, rho_t, h);
  } else {
    const HermitianOperator tu = locally_unbiased_estimator(*inst.estimator, xi_t, h, t);
    g = estimation_angle(tu, rho_t, h, t);
  }
  return {{"t", t},
          {"arc_length", arc_length(table, t)},
          {"theta", g.angle},
          {"theta_direct", g.direct_angle},
          {"residual", g.residual},
          {"cosine", g.raw_cosine},
          {"estimator_spread", g.estimator_spread},
          {"hamiltonian_skew", g.hamiltonian_skew},
          {"locally_unbiased", !raw}};
}

struct ComputeOptions {
  std::string instance;
  int order = 3;
  std::string format = "json";
  bool no_preshift = false;
  bool verify = false;
  std::optional<double> t;
  std::string out;
};

inline Json compute_report(const Instance& inst, const std::string& label, const ComputeOptions& o) {
  if (o.order < 1 || o.order % 2 == 0 || o.order > kMaxLadderDepth)
    throw Error(ErrorCode::InvalidArgument, "--order must be odd and at most 7");
  const int moment_order = std::max(2 * o.order, 2);
  const SqrtState xi = principal_sqrt(inst.state);
  const SkewMomentTable table(inst.hamiltonian, xi, {moment_order, !o.no_preshift});
  const BoundLadder ladder = uncertainty_bound(table, o.order);

  Json report;
  report["label"] = label;
  report["dim"] = inst.state.dim();
  report["purity"] = inst.state.purity();
  report["order"] = o.order;
  report["preshift"] = table.preshifted();
  report["shift"] = table.shift();
  Json moments = Json::array();
  for (int k = 2; k <= moment_order; k += 2) moments.push_back({{"order", k}, {"S", table[k]}});
  report["moments"] = std::move(moments);
  report["ladder"] = ladder_rows_json(ladder);
  report["truncation_order"] = ladder.truncation_order;
  report["saturated"] = ladder.saturated;
  report["bound"] = ladder.bound();
  if (ladder.truncation_order >= 3) report["third_order_closed_form"] = third_order_bound(table);
  if (o.verify) {
    const DerivativeSet d(xi, inst.hamiltonian, o.order);
    const DeterminantCrossCheck cc = cross_check_determinants(ladder, build_frame(d, o.order, true));
    report["crosscheck"] = {{"rows", cc.compared_rows},
                            {"worst_norm_deviation", cc.worst_norm_deviation},
                            {"worst_determinant_deviation", cc.worst_determinant_deviation},
                            {"saturation_agrees", cc.saturation_agrees}};
  }
  if (o.t) report["geometry"] = geometry_json(inst, *o.t, false);
  detail::require_finite(report);
  return report;
}

inline std::string compute_csv(const Json& report) {
  std::ostringstream s;
  s << "label,dim,purity,n,D,N,U,term,cumulative\n";
  const std::string prefix = detail::csv_field(report["label"].get<std::string>()) + "," +
                             std::to_string(report["dim"].get<long long>()) + "," +
                             detail::csv_number(report["purity"].get<double>());
  for (const auto& r : report["ladder"])
    s << prefix << "," << r["n"].get<int>() << "," << detail::csv_number(r["D"].get<double>())
      << "," << detail::csv_number(r["N"].get<double>()) << ","
      << detail::csv_number(r["U"].get<double>()) << ","
      << detail::csv_number(r["term"].get<double>()) << ","
      << detail::csv_number(r["cumulative"].get<double>()) << "\n";
  return s.str();
}

inline int cmd_compute(const ComputeOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Format fmt = parse_format(o.format);
    const Instance inst = load_instance(o.instance);
    const Json report = compute_report(inst, detail::label_or_default(inst, o.instance), o);
    detail::emit(fmt == Format::Json ? report.dump(2) + "\n" : compute_csv(report), o.out, out);
    return int{kSuccess};
  });
}

struct MomentsOptions {
  std::string instance;
  int max_order = kDefaultMomentOrder;
  std::string format = "json";
};

/// Rows S_2..S_max with the closed form, the (order−1, 1) oracle split, and
/// the worst relative deviation over every split of the order. When S_2 is
/// at or below the rank tolerance it is reported as 0; every higher moment
/// then vanishes too and those rows are omitted.
inline Json moments_report(const Instance& inst, const std::string& label, int max_order) {
  if (max_order < 2 || max_order % 2 != 0 || max_order > kMaxMomentOrder)
    throw Error(ErrorCode::InvalidArgument, "--max-order must be even, between 2 and 16");
  const SqrtState xi = principal_sqrt(inst.state);
  const SkewMomentTable table(inst.hamiltonian, xi, {max_order, true});
  const DerivativeSet d(xi, inst.hamiltonian, max_order);
  const bool stationary = table[2] <= rank_tolerance(table, 2);
  Json rows = Json::array();
  if (stationary) {
    rows.push_back({{"order", 2}, {"closed_form", 0.0}, {"oracle", 0.0}, {"deviation", 0.0}});
  }
  for (int k = 2; !stationary && k <= max_order; k += 2) {
    double worst = 0.0;
    for (int n = 0; n <= k; ++n)
      worst = std::max(worst, relative_deviation(table[k], skew_moment_oracle(d, n, k - n)));
    rows.push_back({{"order", k},
                    {"closed_form", table[k]},
                    {"oracle", skew_moment_oracle(d, k - 1, 1)},
                    {"deviation", worst}});
  }
  Json report;
  report["label"] = label;
  report["dim"] = inst.state.dim();
  report["purity"] = inst.state.purity();
  report["max_order"] = max_order;
  report["suppressed"] = stationary;
  report["moments"] = std::move(rows);
  detail::require_finite(report);
  return report;
}

inline int cmd_moments(const MomentsOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Format fmt = parse_format(o.format);
    const Instance inst = load_instance(o.instance);
    const Json report = moments_report(inst, detail::label_or_default(inst, o.instance), o.max_order);
    if (fmt == Format::Json) {
      out << report.dump(2) << "\n";
    } else {
      out << "order,closed_form,oracle,deviation\n";
      for (const auto& r : report["moments"])
        out << r["order"].get<int>() << "," << detail::csv_number(r["closed_form"].get<double>())
            << "," << detail::csv_number(r["oracle"].get<double>()) << ","
            << detail::csv_number(r["deviation"].get<double>()) << "\n";
    }
    return int{kSuccess};
  });
}

struct RandomOptions {
  int dim = 3;
  std::optional<int> rank;
  std::uint64_t seed = 0;
  bool estimator = false;
  std::string out;
};

inline int cmd_random(const RandomOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (o.dim < 2 || o.dim > 16) throw Error(ErrorCode::InvalidArgument, "--dim must lie in [2, 16]");
    const int rank = o.rank.value_or(o.dim);
    if (rank < 1 || rank > o.dim) throw Error(ErrorCode::InvalidArgument, "--rank must lie in [1, dim]");
    const Instance inst = random_instance(o.seed, o.dim, rank, o.estimator);
    detail::emit(instance_to_json(inst).dump(2) + "\n", o.out, out);
    return int{kSuccess};
  });
}

inline int cmd_verify(const VerifyOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const VerifySummary s = run_verify(o);
    out << "trials " << s.trials.size() << ", saturated " << s.saturated_trials
        << ", frame/ladder saturation mismatches " << s.saturation_mismatches << "\n";
    out << std::left << std::setw(26) << "property" << std::right << std::setw(8) << "checked"
        << std::setw(8) << "failed" << std::setw(13) << "worst" << std::setw(11) << "tolerance"
        << "\n";
    for (const auto& p : s.properties) {
      if (p.checked == 0) continue;
      out << std::left << std::setw(26) << p.name << std::right << std::setw(8) << p.checked
          << std::setw(8) << p.failed << std::setw(13) << std::setprecision(3) << std::scientific
          << p.worst << std::setw(11) << std::setprecision(0) << p.tolerance << std::defaultfloat
          << std::setprecision(6) << "\n";
    }
    for (const auto& p : s.properties)
      for (std::uint64_t seed : p.failing_seeds) {
        out << "FAIL " << p.name << " seed=" << seed;
        for (const auto& t : s.trials)
          if (t.seed == seed) {
            out << " dim=" << t.dim << " rank=" << t.rank;
            if (!t.error.empty()) out << " error=\"" << t.error << "\"";
            break;
          }
        out << "\n";
      }
    out << (s.passed() ? "PASS" : "FAIL") << " (" << std::fixed << std::setprecision(2)
        << s.seconds << " s)" << std::defaultfloat << std::setprecision(6) << "\n";
    return int{s.passed() ? kSuccess : kPropertyFailure};
  });
}

inline int cmd_geometry(const GeometryOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Instance inst = load_instance(o.instance);
    Json report = geometry_json(inst, o.t, o.raw);
    report["label"] = detail::label_or_default(inst, o.instance);
    detail::require_finite(report);
    out << report.dump(2) << "\n";
    return int{kSuccess};
  });
}

}  // namespace skewbound::cli
