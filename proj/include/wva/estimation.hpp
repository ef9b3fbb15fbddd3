#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"

#include "wva/closed_forms.hpp"
#include "wva/quantum.hpp"

namespace wva {

/// Counter-based generator: the n-th draw of stream s under seed k is a
/// pure function of (k, s, n), so experiments can run in any order or in
/// parallel and still reproduce bit for bit.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

struct OutcomeRecord {
  std::vector<std::uint64_t> counts;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
};

/// Multinomial draw of `trials` outcomes (sequential conditional binomials).
OutcomeRecord sample_counts(const std::vector<double>& probabilities, std::uint64_t trials, CounterRng& rng);

/// Born-rule sampling of `povm` on `rho`. Deterministic in (seed, stream).
OutcomeRecord sample_outcomes(const QubitState& rho, const Povm& povm, std::uint64_t trials, std::uint64_t seed,
                              std::uint64_t stream = 0);

struct SearchInterval {
  double lo = 0.0;
  double hi = 0.0;
};

/// (-pi/(2t), pi/(2t)): one monotone branch of the direct likelihood.
SearchInterval default_interval(double time);

struct EstimationResult {
  double delta_b_hat = 0.0;
  double log_likelihood = 0.0;
  int n_evaluations = 0;
  std::vector<std::string> warnings;
};

double log_likelihood(const OutcomeRecord& record, const ProbabilityFamily& family, double field);

/// Coarse grid of `grid_points` (>= 256) followed by golden-section
/// refinement to an interval width of 1e-10. Maxima on the interval edge
/// and flat likelihoods are reported as warnings.
EstimationResult mle_estimate(const OutcomeRecord& record, const ProbabilityFamily& family, SearchInterval interval,
                              int grid_points = 512);

/// Observed information per trial, -(1/N) d^2 log L / d field^2.
double observed_information(const OutcomeRecord& record, const ProbabilityFamily& family, double field, double step);

struct CrbReport {
  std::string protocol;
  double true_field = 0.0;
  std::uint64_t trials = 0;
  std::size_t n_experiments = 0;
  std::size_t skipped_experiments = 0;
  double fisher = 0.0;              // per trial of the sampled POVM (per accepted trial when postselected)
  double acceptance = 1.0;          // postselection probability
  double mean_estimate = 0.0;
  double empirical_variance = 0.0;  // unbiased sample variance of the estimates
  double crb = 0.0;                 // 1 / (N q F)
  double ratio = 0.0;               // empirical_variance / crb
  double qfi_crb = 0.0;             // 1 / (N q H) from the quantum Fisher information
  std::vector<std::string> warnings;

  nlohmann::ordered_json to_json() const;
};

/// Direct strategy: M experiments of N trials measuring `povm` on the
/// dephased system state at cfg.field.
CrbReport crb_check(const ProtocolConfig& cfg, const Povm& povm, std::uint64_t trials, std::size_t experiments,
                    std::uint64_t seed, unsigned threads = 1);

/// Postselected strategy: of N trials a Binomial(N, q) number pass the
/// postselection, and the meter of each accepted trial is read out along
/// the equatorial axis perpendicular to its Bloch vector at cfg.field.
CrbReport crb_check_postselected(const ProtocolConfig& cfg, std::uint64_t trials, std::size_t experiments,
                                 std::uint64_t seed, unsigned threads = 1);

/// Uncertainty per root total time under repeat-and-reset: sqrt(t / H(t)).
double sensitivity(double time, double information);

/// argmax of f on [lo, hi]: grid search then golden-section refinement.
double maximize_scalar(const std::function<double(double)>& f, double lo, double hi, int grid_points = 1024);

/// Time in [lo, hi] minimizing sensitivity(t, h_of_t(t)).
double optimal_sensitivity_time(const std::function<double(double)>& h_of_t, double lo, double hi,
                                int grid_points = 1024);

}  // namespace wva
