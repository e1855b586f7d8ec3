#include "lpw/singlet_oracle.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace lpw {

Angle::Angle(double radians) {
  if (!std::isfinite(radians)) throw std::invalid_argument("angle must be finite");
  double v = std::fmod(radians, kTwoPi);
  if (v < 0.0) v += kTwoPi;
  if (v >= kTwoPi) v = 0.0;
  value_ = v;
}

Angle operator-(Angle lhs, Angle rhs) { return Angle(lhs.radians() - rhs.radians()); }

SettingPair ChshQuad::pair(PairIndex index) const {
  return {index.a_index == 0 ? a : a_prime, index.b_index == 0 ? b : b_prime};
}

double& Correlators::operator[](PairIndex i) {
  if (i.a_index == 0) return i.b_index == 0 ? ab : abp;
  return i.b_index == 0 ? apb : apbp;
}

double Correlators::operator[](PairIndex i) const {
  if (i.a_index == 0) return i.b_index == 0 ? ab : abp;
  return i.b_index == 0 ? apb : apbp;
}

DeterministicStrategy DeterministicStrategy::from_index(int k) {
  if (k < 0 || k >= 16) throw std::invalid_argument("strategy index must lie in [0, 16)");
  auto bit = [k](int i) { return ((k >> i) & 1) != 0 ? -1 : 1; };
  return {bit(0), bit(1), bit(2), bit(3)};
}

int DeterministicStrategy::index() const {
  auto bit = [](int v, int i) { return v < 0 ? (1 << i) : 0; };
  return bit(a, 0) | bit(a_prime, 1) | bit(b, 2) | bit(b_prime, 3);
}

StrategyMixture::StrategyMixture(std::vector<Entry> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw std::invalid_argument("strategy mixture is empty");
  double total = 0.0;
  for (const auto& [s, w] : entries_) {
    for (int v : {s.a, s.a_prime, s.b, s.b_prime}) {
      if (v != 1 && v != -1) throw std::invalid_argument("strategy values must be +1 or -1");
    }
    if (!(w >= 0.0)) throw std::invalid_argument("strategy weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("strategy weights sum to " + std::to_string(total) + ", not 1");
  }
}

StrategyMixture StrategyMixture::single(DeterministicStrategy strategy) {
  return StrategyMixture({{strategy, 1.0}});
}

StrategyMixture StrategyMixture::uniform_all() {
  std::vector<Entry> entries;
  for (int k = 0; k < 16; ++k) entries.emplace_back(DeterministicStrategy::from_index(k), 1.0 / 16.0);
  return StrategyMixture(std::move(entries));
}

std::size_t StrategyMixture::draw(double u) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    acc += entries_[i].second;
    if (u < acc) return i;
  }
  // u fell in the rounding slack above the last cumulative weight
  for (std::size_t i = entries_.size(); i-- > 0;) {
    if (entries_[i].second > 0.0) return i;
  }
  return entries_.size() - 1;
}

double quantum_correlation(Angle theta) { return -std::cos(theta.radians()); }

double joint_probability(int outcome_a, int outcome_b, Angle theta) {
  if ((outcome_a != 1 && outcome_a != -1) || (outcome_b != 1 && outcome_b != -1)) {
    throw std::invalid_argument("outcomes must be +1 or -1");
  }
  return (1.0 - outcome_a * outcome_b * std::cos(theta.radians())) / 4.0;
}

double chsh_value(const Correlators& e, ChshForm form) {
  // weighted sums of ±1 may overshoot by a few ulps
  constexpr double kSlack = 1e-12;
  for (double v : {e.ab, e.abp, e.apb, e.apbp}) {
    if (!(std::abs(v) <= 1.0 + kSlack)) {
      throw std::invalid_argument("correlator " + std::to_string(v) + " outside [-1, 1]");
    }
  }
  if (form == ChshForm::SplitAbsolute) return std::abs(e.ab - e.abp) + std::abs(e.apb + e.apbp);
  return std::abs(e.ab + e.abp + e.apb - e.apbp);
}

ChshQuad standard_chsh_angles() {
  constexpr double pi = std::numbers::pi;
  return {Angle(0.0), Angle(pi / 2), Angle(pi / 4), Angle(3 * pi / 4)};
}

Correlators quantum_correlators(const ChshQuad& quad) {
  Correlators e;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      PairIndex idx{i, j};
      e[idx] = quantum_correlation(quad.pair(idx).relative());
    }
  }
  return e;
}

Correlators strategy_correlators(const StrategyMixture& mixture, const ChshQuad& /*quad*/) {
  Correlators e;
  for (const auto& [s, w] : mixture.entries()) {
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) e[{i, j}] += w * s.wing1(i) * s.wing2(j);
    }
  }
  return e;
}

LhvOptimum brute_force_lhv_max(ChshForm form) {
  LhvOptimum best{-1.0, {}};
  const ChshQuad quad = standard_chsh_angles();
  for (int k = 0; k < 16; ++k) {
    auto s = DeterministicStrategy::from_index(k);
    double v = chsh_value(strategy_correlators(StrategyMixture::single(s), quad), form);
    if (v > best.value) best = {v, s};
  }
  return best;
}

OutcomePair sample_quantum_outcomes(Angle theta, RngStream& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  constexpr std::array<OutcomePair, 4> order{{{1, 1}, {1, -1}, {-1, 1}, {-1, -1}}};
  for (const auto& o : order) {
    acc += joint_probability(o.wing1, o.wing2, theta);
    if (u < acc) return o;
  }
  // rounding slack: return the last outcome with nonzero weight
  for (std::size_t i = order.size(); i-- > 0;) {
    if (joint_probability(order[i].wing1, order[i].wing2, theta) > 0.0) return order[i];
  }
  return order.back();
}

}  // namespace lpw
