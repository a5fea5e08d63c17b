#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ndpmpm/dataset.hpp"
#include "ndpmpm/rng.hpp"

namespace ndpmpm {

class RuleSet;

enum class BetaMode { kCommon, kPerClass };

struct Hyperparams {
  int F = 10;
  int S = 10;
  double a_alpha = 0.25;
  double b_alpha = 0.25;
  double a_beta = 0.25;
  double b_beta = 0.25;
  BetaMode beta_mode = BetaMode::kCommon;
  /// Dirichlet weights, one vector of length d_k per variable.
  std::vector<std::vector<double>> household_weights;
  std::vector<std::vector<double>> individual_weights;

  /// Throws InputError when dimensions disagree with the schema or a value is not positive.
  void validate(const Schema& schema) const;
};

/// All Dirichlet weights equal to 1.
Hyperparams uniform_prior(const Schema& schema, int F, int S);
/// Dirichlet weights set to the empirical marginal frequencies scaled to total
/// mass d_k. Unobserved categories get `floor` so every weight stays positive.
Hyperparams empirical_prior(const Dataset& data, int F, int S, double floor = 0.01);

/// Model parameters. Flat row-major storage:
///   v, omega:       [g * S + m]
///   lambda[k]:      [g * d_k + c]
///   phi[k]:         [(g * S + m) * d_k + c]
struct Params {
  int F = 1;
  int S = 1;
  std::vector<double> u, pi;
  std::vector<double> v, omega;
  /// log(1 - u) and log(1 - v) as drawn. Sticks close to 1 round to 1 in
  /// double precision; these keep the complement. Empty when unknown.
  std::vector<double> log1m_u, log1m_v;
  std::vector<std::vector<double>> lambda;
  std::vector<std::vector<double>> phi;
  double alpha = 1.0;
  std::vector<double> beta;  // one entry (common) or F entries

  std::size_t household_var_count() const { return lambda.size(); }
  std::size_t individual_var_count() const { return phi.size(); }
  int household_cardinality(std::size_t k) const { return static_cast<int>(lambda[k].size()) / F; }
  int individual_cardinality(std::size_t k) const { return static_cast<int>(phi[k].size()) / (F * S); }

  double lambda_at(std::size_t k, int g, int c) const { return lambda[k][g * household_cardinality(k) + c]; }
  double phi_at(std::size_t k, int g, int m, int c) const {
    return phi[k][(g * S + m) * individual_cardinality(k) + c];
  }
  double omega_at(int g, int m) const { return omega[g * S + m]; }
  double beta_for(int g) const { return beta.size() == 1 ? beta[0] : beta[g]; }

  /// Max absolute deviation from 1 over every simplex, and stick identity errors.
  double simplex_error() const;
};

/// Latent class assignments, 0-based: G[i] in [0, F), M[i][j] in [0, S).
struct LatentState {
  std::vector<int> G;
  std::vector<std::vector<int>> M;
};

/// Truncated stick-breaking weights: out_g = sticks_g * prod_{f<g} (1 - sticks_f).
/// The last stick must be 1. Throws InputError for entries outside [0, 1].
std::vector<double> stick_break(std::span<const double> sticks);

Params prior_draw(const Hyperparams& hyper, Rng& rng);

/// Precomputed logs of a Params value for repeated likelihood evaluation.
class LogTables {
 public:
  explicit LogTables(const Params& params);

  const Params& params() const { return *params_; }
  double log_pi(int g) const { return log_pi_[g]; }
  double log_omega(int g, int m) const { return log_omega_[g * S_ + m]; }
  double log_lambda(std::size_t k, int g, int c) const { return log_lambda_[k][g * hh_card_[k] + c]; }
  double log_phi(std::size_t k, int g, int m, int c) const {
    return log_phi_[k][(g * S_ + m) * ind_card_[k] + c];
  }

  /// log sum_m omega_gm prod_k phi_gmk(member_k).
  double member_log_mix(int g, std::span<const int> member) const;
  /// log [ pi_g prod_k lambda_gk prod_j sum_m omega_gm prod_k phi ].
  double household_class_log_joint(int g, const HouseholdRecord& record) const;
  /// log P(record), marginalizing G and M.
  double household_log_likelihood(const HouseholdRecord& record) const;

 private:
  const Params* params_;
  int F_, S_;
  std::vector<int> hh_card_, ind_card_;
  std::vector<double> log_pi_, log_omega_;
  std::vector<std::vector<double>> log_lambda_, log_phi_;
};

/// log P(record | params), including the size variable's kernel.
double household_log_likelihood(const HouseholdRecord& record, const Params& params);

/// log P(record | size = record's size, params): the size kernel is renormalized out.
double household_log_likelihood_given_size(const HouseholdRecord& record, const Params& params, const Schema& schema);

/// Pr(X_ijk = c, X_ij'k = c') for two members of the same household, with
/// classes weighted by pi alone (the size kernel is left out).
double pair_probability(std::size_t k, int c, int c_prime, const Params& params);
/// Same pair probability for households of size h: classes weighted by
/// pi_g * lambda_size(g, h). Equals pair_probability when the size kernel
/// does not vary across classes.
double pair_probability_given_size(std::size_t k, int c, int c_prime, const Params& params, const Schema& schema,
                                   int h);
/// Pr(X_ijk = c).
double marginal_probability(std::size_t k, int c, const Params& params);

/// A household drawn from the untruncated generative model given its size.
struct GeneratedHousehold {
  HouseholdRecord record;
  int G = 0;
  std::vector<int> M;
};

/// Draws G proportional to lambda_size(g, h) * pi_g, then members and the
/// remaining variables. Throws ComputeError when no class can produce size h.
GeneratedHousehold generate_household(const Params& params, const Schema& schema, int h, Rng& rng);

/// Pr(size = h | params) = sum_g pi_g lambda_size(g, h).
double size_probability(const Params& params, const Schema& schema, int h);

struct InfeasibleMass {
  double value = 0.0;
  double std_error = 0.0;
};

/// Exact evaluation of pi_0h by enumeration of C_h (throws InputError past `cap`).
InfeasibleMass infeasible_mass_exact(const Params& params, const Schema& schema, int h, const RuleSet& rules,
                                     std::uint64_t cap = 10'000'000);
/// Monte Carlo estimate of pi_0h from `draws` generated households.
InfeasibleMass infeasible_mass_monte_carlo(const Params& params, const Schema& schema, int h, const RuleSet& rules,
                                           std::size_t draws, std::uint64_t seed);

/// Numerically stable log(sum(exp(x))).
double log_sum_exp(std::span<const double> x);

}  // namespace ndpmpm
