#pragma once

#include <array>
#include <numbers>
#include <utility>
#include <vector>

#include "lpw/rng.hpp"

namespace lpw {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// An angle in radians, always normalized to [0, 2π).
class Angle {
 public:
  constexpr Angle() = default;
  explicit Angle(double radians);

  double radians() const { return value_; }

  friend bool operator==(const Angle&, const Angle&) = default;

 private:
  double value_ = 0.0;
};

/// Normalized difference lhs − rhs.
Angle operator-(Angle lhs, Angle rhs);

/// Measurement directions for the two wings, both in the x–z plane.
/// The direction for angle α is (sin α, 0, cos α).
struct SettingPair {
  Angle alpha;
  Angle beta;

  /// Relative angle between the two measured directions.
  Angle relative() const { return alpha - beta; }
};

/// Index of a quad corner: 0 selects the unprimed direction, 1 the primed one.
struct PairIndex {
  int a_index = 0;
  int b_index = 0;
  friend bool operator==(const PairIndex&, const PairIndex&) = default;
};

struct ChshQuad {
  Angle a;
  Angle a_prime;
  Angle b;
  Angle b_prime;

  SettingPair pair(PairIndex index) const;
};

/// The four CHSH correlators in the fixed order (a,b), (a,b′), (a′,b), (a′,b′).
struct Correlators {
  double ab = 0.0;
  double abp = 0.0;
  double apb = 0.0;
  double apbp = 0.0;

  double& operator[](PairIndex index);
  double operator[](PairIndex index) const;
};

/// The two algebraic CHSH combinations.
///   SplitAbsolute:  |E(a,b) − E(a,b′)| + |E(a′,b) + E(a′,b′)|   (default)
///   SingleAbsolute: |E(a,b) + E(a,b′) + E(a′,b) − E(a′,b′)|
enum class ChshForm { SplitAbsolute, SingleAbsolute };

/// Predetermined ±1 answers for every setting a pair might meet.
struct DeterministicStrategy {
  int a = 1;
  int a_prime = 1;
  int b = 1;
  int b_prime = 1;

  /// Strategy number k in [0, 16): bit i set means the i-th field is −1.
  static DeterministicStrategy from_index(int k);
  int index() const;
  int wing1(int a_index) const { return a_index == 0 ? a : a_prime; }
  int wing2(int b_index) const { return b_index == 0 ? b : b_prime; }

  friend bool operator==(const DeterministicStrategy&, const DeterministicStrategy&) = default;
};

/// A finite distribution ρ(λ) over deterministic strategies.
class StrategyMixture {
 public:
  using Entry = std::pair<DeterministicStrategy, double>;

  /// Throws std::invalid_argument unless weights are ≥ 0 and sum to 1 within 1e-12.
  explicit StrategyMixture(std::vector<Entry> entries);

  static StrategyMixture single(DeterministicStrategy strategy);
  static StrategyMixture uniform_all();

  const std::vector<Entry>& entries() const { return entries_; }

  /// Inverse-CDF draw of an entry index given u in [0, 1).
  std::size_t draw(double u) const;

 private:
  std::vector<Entry> entries_;
};

struct OutcomePair {
  int wing1 = 1;
  int wing2 = 1;
  friend bool operator==(const OutcomePair&, const OutcomePair&) = default;
};

/// Singlet correlator −cos θ for directions at relative angle θ.
double quantum_correlation(Angle theta);

/// Singlet joint probability (1 − A·B·cos θ)/4. Throws on outcomes other than ±1.
double joint_probability(int outcome_a, int outcome_b, Angle theta);

/// Throws std::invalid_argument if any correlator lies outside [−1, 1] by more than 1e-12.
double chsh_value(const Correlators& e, ChshForm form = ChshForm::SplitAbsolute);

/// Coplanar quad (0, π/2, π/4, 3π/4): a ⟂ a′, b ⟂ b′, 45° between a and b.
ChshQuad standard_chsh_angles();

/// Quantum correlators −cos(α − β) for every corner of the quad.
Correlators quantum_correlators(const ChshQuad& quad);

/// E(x,y) = Σ_λ w(λ)·A(x,λ)·B(y,λ). Strategies answer per quad corner, so the
/// quad only labels the result.
Correlators strategy_correlators(const StrategyMixture& mixture, const ChshQuad& quad);

struct LhvOptimum {
  double value = 0.0;
  DeterministicStrategy strategy;
};

/// Exhaustive maximum of chsh_value over the 16 deterministic strategies.
/// Mixtures are convex combinations, so this bounds every local model.
LhvOptimum brute_force_lhv_max(ChshForm form = ChshForm::SplitAbsolute);

/// One draw from the singlet joint distribution at relative angle θ.
OutcomePair sample_quantum_outcomes(Angle theta, RngStream& rng);

}  // namespace lpw
