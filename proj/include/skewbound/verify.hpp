#pragma once

// Property battery run over seeded random instances. Each trial evaluates
// every cross-check between the closed-form route and the brute-force frame
// route, plus the invariance properties, and reports one deviation per
// property. Trials are independent; results are merged in trial order.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "skewbound/bound_ladder.hpp"
#include "skewbound/derivatives.hpp"
#include "skewbound/oracle.hpp"
#include "skewbound/random.hpp"
#include "skewbound/skew_moments.hpp"

namespace skewbound {

/// |a − b| / max(|a|, |b|); 0 when both vanish.
inline double relative_deviation(double a, double b) {
  const double denom = std::max(std::abs(a), std::abs(b));
  if (denom == 0.0) return 0.0;
  return std::abs(a - b) / denom;
}

enum class Property : int {
  LemmaEquivalence,
  OddSumVanishing,
  ParityLeakage,
  NormCrossCheck,
  NumeratorOracle,
  PairingIdentity,
  ThirdOrderClosedForm,
  ParsevalSecondKind,
  ParsevalGradient,
  ParsevalZeroTerm,
  FirstOrderMoment,
  FirstOrderBound,
  Sandwich,
  PureReduction,
  ShiftInvariance,
  ShiftInvarianceRaw,
  ScaleCovariance,
  UnitaryCovariance,
  TimeInvariance,
  LadderMonotone,
  QubitCollapse,
  FiniteOutput,
  TrialError,
  Count,
};

struct PropertySpec {
  const char* name;
  double tolerance;
};

inline constexpr PropertySpec kPropertySpecs[] = {
    {"lemma_equivalence", 1e-9},       {"odd_sum_vanishing", 1e-10},
    {"parity_leakage", 1e-10},         {"norm_crosscheck", 1e-8},
    {"numerator_oracle", 1e-8},        {"pairing_identity", 1e-9},
    {"third_order_closed_form", 1e-10}, {"parseval_second_kind", 1e-10},
    {"parseval_gradient", 1e-10},      {"parseval_zero_term", 1e-12},
    {"first_order_moment", 1e-12},     {"first_order_bound", 1e-10},
    {"sandwich", 1e-10},               {"pure_reduction", 1e-10},
    {"shift_invariance", 1e-8},        {"shift_invariance_raw", 1e-12},
    {"scale_covariance", 1e-8},
    {"unitary_covariance", 1e-8},      {"time_invariance", 1e-8},
    {"ladder_monotone", 0.0},          {"qubit_collapse", 1e-9},
    {"finite_output", 0.0},            {"trial_error", 0.0},
};

static_assert(std::size(kPropertySpecs) == static_cast<std::size_t>(Property::Count));

inline constexpr double kFailed = std::numeric_limits<double>::infinity();

struct Observation {
  Property property;
  double deviation;
};

struct TrialResult {
  std::uint64_t seed = 0;
  Eigen::Index dim = 0;
  Eigen::Index rank = 0;
  std::vector<Observation> observations;
  int saturated_rows = 0;
  bool saturation_mismatch = false;
  std::string error;
};

struct TrialOptions {
  int depth = kDefaultLadderDepth;
  double shift_fraction = 0.75;
  double scale_factor = 1.7;
  double evolution_time = 0.37;
};

namespace detail {

class Recorder {
 public:
  explicit Recorder(TrialResult& r) : r_(r) {}

  void operator()(Property p, double deviation) {
    if (!std::isfinite(deviation)) deviation = kFailed;
    r_.observations.push_back({p, deviation});
  }

  /// Records max over a batch as a single observation.
  void max(Property p, const std::vector<double>& deviations) {
    if (deviations.empty()) return;
    double worst = 0.0;
    for (double d : deviations) worst = std::isfinite(d) ? std::max(worst, d) : kFailed;
    (*this)(p, worst);
  }

 private:
  TrialResult& r_;
};

inline bool ladder_finite(const BoundLadder& l) {
  for (const auto& row : l.rows)
    for (double v : {row.determinant, row.norm, row.numerator, row.term, row.cumulative})
      if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace detail

/// All checks for one instance. The estimator, when present, drives the
/// Parseval and pure-state checks; `seed` also seeds the covariance unitary.
inline TrialResult run_trial(const Instance& inst, std::uint64_t seed, const TrialOptions& opts) {
  TrialResult result;
  result.seed = seed;
  result.dim = inst.state.dim();
  detail::Recorder record(result);
  try {
    const HermitianOperator& h = inst.hamiltonian;
    const DensityMatrix& rho = inst.state;
    const SqrtState xi = principal_sqrt(rho);
    const int depth = opts.depth;
    const int moment_order = std::min(kMaxMomentOrder, std::max(12, 2 * depth));
    const int derivative_order = std::max(13, moment_order);
    const double h_scale = 1.0 + spectral_norm(h);

    const SkewMomentTable table(h, xi, {moment_order, true});
    const DerivativeSet dset(xi, h, derivative_order);

    bool finite = true;
    for (double s : table.moments()) finite = finite && std::isfinite(s);

    // Closed form against every split of the derivative inner product.
    std::vector<double> devs;
    for (int order = 2; order <= moment_order; order += 2)
      for (int n = 0; n <= order; ++n)
        devs.push_back(relative_deviation(table[order], skew_moment_oracle(dset, n, order - n)));
    record.max(Property::LemmaEquivalence, devs);

    devs.clear();
    for (int a = 0; a <= 12; a += 2)
      for (int b = 1; a + b <= 13; b += 2)
        devs.push_back(std::abs(derivative_inner(dset, a, b)) / std::pow(h_scale, a + b));
    record.max(Property::OddSumVanishing, devs);

    devs.clear();
    for (int m = 0; m <= 5; ++m) {
      const PairingCheck pc = pairing_identity_check(dset, m);
      devs.push_back(relative_deviation(pc.lhs, pc.rhs));
    }
    record.max(Property::PairingIdentity, devs);

    const double wy = wy_skew_information(h, xi);
    const double var_h = central_moment(h, rho, 2);
    record(Property::FirstOrderMoment,
           relative_deviation(skew_moment_closed_form(h, xi, 2), 2.0 * wy));
    record(Property::Sandwich,
           std::max({0.0, -wy, wy - var_h}) / (h_scale * h_scale));

    const bool stationary = table[2] <= rank_tolerance(table, 2);
    if (!stationary) {
      const BoundLadder ladder = uncertainty_bound(table, depth);
      finite = finite && detail::ladder_finite(ladder);
      result.saturated_rows = ladder.saturated ? 1 : 0;

      record(Property::FirstOrderBound,
             relative_deviation(ladder.rows.front().cumulative, 1.0 / (4.0 * wy)));

      double monotone = 0.0;
      for (std::size_t i = 1; i < ladder.rows.size(); ++i)
        if (ladder.rows[i].cumulative < ladder.rows[i - 1].cumulative) monotone = kFailed;
      for (const auto& row : ladder.rows)
        if (!(row.norm > 0.0)) monotone = kFailed;
      record(Property::LadderMonotone, monotone);

      const OrthogonalFrame odd = build_frame(dset, depth, true);
      record(Property::ParityLeakage, odd.parity_leakage);
      devs.clear();
      std::vector<double> udevs;
      const auto u = numerators(table, ladder.truncation_order);
      for (const auto& row : ladder.rows) {
        const FrameVector* v = odd.find(row.order);
        if (v == nullptr) {
          result.saturation_mismatch = true;
          continue;
        }
        devs.push_back(relative_deviation(row.norm, v->norm_sq));
        // U_n is a difference of terms of size n·S_{n−1}; compare on that scale.
        const double un = u[static_cast<std::size_t>(row.order / 2)];
        const double reference = std::max(std::abs(un), row.order * std::abs(table[row.order - 1]));
        udevs.push_back(std::abs(un - numerator_oracle(dset, odd, row.order / 2)) / reference);
      }
      record.max(Property::NormCrossCheck, devs);
      record.max(Property::NumeratorOracle, udevs);

      if (ladder.truncation_order >= 3) {
        const double b3 = ladder.rows[1].cumulative;
        record(Property::ThirdOrderClosedForm, relative_deviation(b3, third_order_bound(table)));
      }

      if (result.dim == 2) {
        const double d6 = table[6] * table[2] - table[4] * table[4];
        double dev = std::abs(d6) / std::pow(h_scale, 12);
        if (depth >= 3 && !(ladder.truncation_order == 1 && ladder.saturated)) dev = kFailed;
        record(Property::QubitCollapse, dev);
      }

      // Covariance of the whole ladder under H → λH.
      const double lambda = opts.scale_factor;
      const HermitianOperator hs = lambda * h;
      const SkewMomentTable scaled(hs, xi, {moment_order, true});
      devs.clear();
      for (int order = 2; order <= moment_order; order += 2)
        devs.push_back(relative_deviation(scaled[order], std::pow(lambda, order) * table[order]));
      const BoundLadder scaled_ladder = uncertainty_bound(scaled, depth);
      if (scaled_ladder.truncation_order == ladder.truncation_order)
        devs.push_back(relative_deviation(scaled_ladder.bound(), ladder.bound() / (lambda * lambda)));
      else
        devs.push_back(kFailed);
      record.max(Property::ScaleCovariance, devs);
    }

    // H → H + cI, once through the default centered tables (relative) and once
    // through the uncentered closed form, whose rounding grows like
    // (‖H‖ + |c|)^order and is compared on that scale.
    {
      const double c = opts.shift_fraction * spectral_norm(h);
      const HermitianOperator hc = shifted(h, c);
      const SkewMomentTable moved(hc, xi, {moment_order, true});
      devs.clear();
      std::vector<double> raw;
      const double raw_scale = 1.0 + spectral_norm(h) + std::abs(c);
      for (int order = 2; order <= moment_order; order += 2) {
        devs.push_back(relative_deviation(moved[order], table[order]));
        raw.push_back(std::abs(skew_moment_closed_form(hc, xi, order) -
                               skew_moment_closed_form(h, xi, order)) /
                      std::pow(raw_scale, order));
      }
      record.max(Property::ShiftInvariance, devs);
      record.max(Property::ShiftInvarianceRaw, raw);
    }

    {
      Rng aux(seed ^ 0xC0FFEEULL);
      const Matrix u = random_unitary(aux, result.dim);
      const SqrtState xu(conjugated(xi.op(), u));
      const SkewMomentTable rotated(conjugated(h, u), xu, {moment_order, true});
      devs.clear();
      for (int order = 2; order <= moment_order; order += 2)
        devs.push_back(relative_deviation(rotated[order], table[order]));
      record.max(Property::UnitaryCovariance, devs);
    }

    {
      const SkewMomentTable later(h, evolve(xi, h, opts.evolution_time), {moment_order, true});
      devs.clear();
      for (int order = 2; order <= moment_order; order += 2)
        devs.push_back(relative_deviation(later[order], table[order]));
      record.max(Property::TimeInvariance, devs);
    }

    if (inst.estimator) {
      const HermitianOperator& t = *inst.estimator;
      const double t_scale = 1.0 + spectral_norm(t);
      const OrthogonalFrame full =
          complete_frame(build_frame(dset, dset.max_order(), false), RealVectorization(result.dim));
      const ParsevalDecomposition pd = parseval_decomposition(t, xi, full);
      record(Property::ParsevalSecondKind,
             relative_deviation(pd.total, skew_info_second_kind(t, xi)));
      record(Property::ParsevalGradient, relative_deviation(pd.total, 0.5 * grad_norm_sq(t, xi)));
      double zero_term = 0.0;
      for (const auto& term : pd.terms)
        if (term.source_order == 0) zero_term = term.value / (t_scale * t_scale);
      record(Property::ParsevalZeroTerm, zero_term);

      if (rho.is_pure()) {
        const double var_t = central_moment(t, rho, 2);
        const double delta_h = std::abs(var_h - wy) / (h_scale * h_scale);
        const double delta_t = std::abs(skew_info_second_kind(t, xi) - var_t) / (t_scale * t_scale);
        double dev = std::max(delta_h, delta_t);
        if (!stationary) {
          const BoundLadder first = uncertainty_bound(table, 1);
          dev = std::max(dev, relative_deviation(first.bound(), 1.0 / (4.0 * var_h)));
        }
        record(Property::PureReduction, dev);
      }
    }

    record(Property::FiniteOutput, finite ? 0.0 : kFailed);
  } catch (const std::exception& e) {
    result.error = e.what();
    record(Property::TrialError, kFailed);
  }
  return result;
}

struct PropertyTally {
  std::string name;
  double tolerance = 0.0;
  int checked = 0;
  int failed = 0;
  double worst = 0.0;
  std::vector<std::uint64_t> failing_seeds;
};

struct VerifyOptions {
  std::vector<int> dims{3, 4, 5};
  int trials = 20;
  std::uint64_t seed = 1;
  int depth = kDefaultLadderDepth;
  unsigned threads = 0;  // 0: hardware concurrency
};

struct VerifySummary {
  std::vector<PropertyTally> properties;
  std::vector<TrialResult> trials;
  int saturated_trials = 0;
  int saturation_mismatches = 0;
  double seconds = 0.0;

  bool passed() const {
    return std::all_of(properties.begin(), properties.end(),
                       [](const PropertyTally& p) { return p.failed == 0; });
  }
};

/// Trial i (dims-major, then trial index) uses child_seed(seed, i) and rank
/// 1 + (trial index mod dim), with a random estimator drawn after H.
inline VerifySummary run_verify(const VerifyOptions& opts) {
  if (opts.trials < 1) throw Error(ErrorCode::InvalidArgument, "trials must be positive");
  if (opts.depth < 1 || opts.depth % 2 == 0 || opts.depth > kMaxLadderDepth)
    throw Error(ErrorCode::InvalidArgument, "depth must be odd and at most 7");
  struct Job {
    std::uint64_t seed;
    int dim;
    int rank;
  };
  std::vector<Job> jobs;
  std::uint64_t index = 0;
  for (int d : opts.dims) {
    if (d < 2 || d > 16) throw Error(ErrorCode::InvalidArgument, "dims must lie in [2, 16]");
    for (int t = 0; t < opts.trials; ++t)
      jobs.push_back({child_seed(opts.seed, index++), d, 1 + t % d});
  }

  const auto start = std::chrono::steady_clock::now();
  VerifySummary summary;
  summary.trials.resize(jobs.size());
  TrialOptions topts;
  topts.depth = opts.depth;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const Job& j = jobs[i];
      TrialResult r;
      try {
        const Instance inst = random_instance(j.seed, j.dim, j.rank, true);
        r = run_trial(inst, j.seed, topts);
      } catch (const std::exception& e) {
        r.seed = j.seed;
        r.error = e.what();
        r.observations.push_back({Property::TrialError, kFailed});
      }
      r.rank = j.rank;
      summary.trials[i] = std::move(r);
    }
  };
  unsigned nthreads = opts.threads != 0 ? opts.threads : std::thread::hardware_concurrency();
  nthreads = std::max(1u, std::min<unsigned>(nthreads, static_cast<unsigned>(jobs.size())));
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < nthreads; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  for (const auto& spec : kPropertySpecs) summary.properties.push_back({spec.name, spec.tolerance, 0, 0, 0.0, {}});
  for (const auto& tr : summary.trials) {
    summary.saturated_trials += tr.saturated_rows;
    summary.saturation_mismatches += tr.saturation_mismatch ? 1 : 0;
    for (const auto& ob : tr.observations) {
      PropertyTally& p = summary.properties[static_cast<std::size_t>(ob.property)];
      ++p.checked;
      p.worst = std::max(p.worst, ob.deviation);
      if (!(ob.deviation <= p.tolerance)) {
        ++p.failed;
        if (std::find(p.failing_seeds.begin(), p.failing_seeds.end(), tr.seed) ==
            p.failing_seeds.end())
          p.failing_seeds.push_back(tr.seed);
      }
    }
  }
  summary.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return summary;
}

}  // namespace skewbound
