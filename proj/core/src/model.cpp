#include "ndpmpm/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ndpmpm/error.hpp"
#include "ndpmpm/rules.hpp"

namespace ndpmpm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Below this the probability-space fast path hands over to log space.
constexpr double kUnderflowGuard = 1e-250;

}  // namespace

double log_sum_exp(std::span<const double> x) {
  double top = kNegInf;
  for (double v : x) top = std::max(top, v);
  if (!std::isfinite(top)) return top;
  double total = 0.0;
  for (double v : x) total += std::exp(v - top);
  return top + std::log(total);
}

void Hyperparams::validate(const Schema& schema) const {
  if (F < 1 || S < 1) throw InputError("hyperparameters: F and S must be at least 1");
  for (double x : {a_alpha, b_alpha, a_beta, b_beta})
    if (!(x > 0.0)) throw InputError("hyperparameters: Gamma shapes and rates must be positive");
  auto check = [](const std::vector<std::vector<double>>& weights, const std::vector<VariableSpec>& vars) {
    if (weights.size() != vars.size()) throw InputError("hyperparameters: Dirichlet weight count mismatch");
    for (std::size_t k = 0; k < vars.size(); ++k) {
      if (weights[k].size() != static_cast<std::size_t>(vars[k].cardinality))
        throw InputError("hyperparameters: Dirichlet weights for '" + vars[k].name + "' have wrong length");
      for (double w : weights[k])
        if (!(w > 0.0)) throw InputError("hyperparameters: Dirichlet weights must be positive");
    }
  };
  check(household_weights, schema.household_vars);
  check(individual_weights, schema.individual_vars);
}

Hyperparams uniform_prior(const Schema& schema, int F, int S) {
  Hyperparams hyper;
  hyper.F = F;
  hyper.S = S;
  for (const auto& v : schema.household_vars) hyper.household_weights.emplace_back(v.cardinality, 1.0);
  for (const auto& v : schema.individual_vars) hyper.individual_weights.emplace_back(v.cardinality, 1.0);
  return hyper;
}

Hyperparams empirical_prior(const Dataset& data, int F, int S, double floor) {
  const auto& schema = data.schema;
  Hyperparams hyper = uniform_prior(schema, F, S);
  auto scale = [floor](std::vector<double>& w, double total) {
    const double d = static_cast<double>(w.size());
    for (double& x : w) x = total > 0.0 ? std::max(floor, d * x / total) : 1.0;
  };
  for (std::size_t k = 0; k < schema.q(); ++k) {
    auto& w = hyper.household_weights[k];
    std::fill(w.begin(), w.end(), 0.0);
    for (const auto& h : data.households) w[h.household_values[k]] += 1.0;
    scale(w, static_cast<double>(data.num_households()));
  }
  for (std::size_t k = 0; k < schema.p(); ++k) {
    auto& w = hyper.individual_weights[k];
    std::fill(w.begin(), w.end(), 0.0);
    for (const auto& h : data.households)
      for (const auto& m : h.members) w[m[k]] += 1.0;
    scale(w, static_cast<double>(data.num_individuals()));
  }
  return hyper;
}

double Params::simplex_error() const {
  double err = 0.0;
  auto rows = [&err](const std::vector<double>& flat, std::size_t width) {
    for (std::size_t start = 0; start < flat.size(); start += width) {
      double total = 0.0;
      for (std::size_t c = 0; c < width; ++c) {
        if (!(flat[start + c] >= 0.0)) return void(err = std::numeric_limits<double>::infinity());
        total += flat[start + c];
      }
      err = std::max(err, std::abs(total - 1.0));
    }
  };
  rows(pi, static_cast<std::size_t>(F));
  rows(omega, static_cast<std::size_t>(S));
  for (std::size_t k = 0; k < lambda.size(); ++k) rows(lambda[k], static_cast<std::size_t>(household_cardinality(k)));
  for (std::size_t k = 0; k < phi.size(); ++k) rows(phi[k], static_cast<std::size_t>(individual_cardinality(k)));
  if (u.back() != 1.0) err = std::max(err, std::abs(u.back() - 1.0));
  for (int g = 0; g < F; ++g)
    if (v[g * S + S - 1] != 1.0) err = std::max(err, std::abs(v[g * S + S - 1] - 1.0));
  return err;
}

std::vector<double> stick_break(std::span<const double> sticks) {
  if (sticks.empty()) throw InputError("stick_break: empty input");
  std::vector<double> out(sticks.size());
  double remaining = 1.0;
  for (std::size_t g = 0; g < sticks.size(); ++g) {
    const double s = sticks[g];
    if (!(s >= 0.0 && s <= 1.0)) throw InputError("stick_break: entry outside [0, 1]");
    out[g] = s * remaining;
    remaining *= 1.0 - s;
  }
  if (sticks.back() != 1.0) throw InputError("stick_break: final stick must equal 1");
  return out;
}

Params prior_draw(const Hyperparams& hyper, Rng& rng) {
  Params params;
  const int F = hyper.F;
  const int S = hyper.S;
  params.F = F;
  params.S = S;
  params.alpha = rng.gamma_rate(hyper.a_alpha, hyper.b_alpha);
  const std::size_t n_beta = hyper.beta_mode == BetaMode::kCommon ? 1 : static_cast<std::size_t>(F);
  for (std::size_t b = 0; b < n_beta; ++b) params.beta.push_back(rng.gamma_rate(hyper.a_beta, hyper.b_beta));

  params.u.assign(F, 1.0);
  params.log1m_u.assign(F, -std::numeric_limits<double>::infinity());
  for (int g = 0; g + 1 < F; ++g) {
    const auto draw = rng.beta_split(1.0, params.alpha);
    params.u[g] = draw.value;
    params.log1m_u[g] = draw.log_complement;
  }
  params.pi = stick_break(params.u);

  params.v.assign(static_cast<std::size_t>(F) * S, 1.0);
  params.log1m_v.assign(params.v.size(), -std::numeric_limits<double>::infinity());
  params.omega.resize(params.v.size());
  for (int g = 0; g < F; ++g) {
    for (int m = 0; m + 1 < S; ++m) {
      const auto draw = rng.beta_split(1.0, params.beta_for(g));
      params.v[g * S + m] = draw.value;
      params.log1m_v[g * S + m] = draw.log_complement;
    }
    const auto row = stick_break(std::span<const double>(params.v).subspan(g * S, S));
    std::copy(row.begin(), row.end(), params.omega.begin() + g * S);
  }

  for (const auto& w : hyper.household_weights) {
    std::vector<double> table(w.size() * F);
    for (int g = 0; g < F; ++g) rng.dirichlet(w, std::span<double>(table).subspan(g * w.size(), w.size()));
    params.lambda.push_back(std::move(table));
  }
  for (const auto& w : hyper.individual_weights) {
    std::vector<double> table(w.size() * F * S);
    for (int gm = 0; gm < F * S; ++gm) rng.dirichlet(w, std::span<double>(table).subspan(gm * w.size(), w.size()));
    params.phi.push_back(std::move(table));
  }
  return params;
}

// ---- LogTables ----

LogTables::LogTables(const Params& params) : params_(&params), F_(params.F), S_(params.S) {
  auto logs = [](const std::vector<double>& x) {
    std::vector<double> out(x.size());
    std::transform(x.begin(), x.end(), out.begin(), [](double v) { return std::log(v); });
    return out;
  };
  log_pi_ = logs(params.pi);
  log_omega_ = logs(params.omega);
  for (std::size_t k = 0; k < params.lambda.size(); ++k) {
    hh_card_.push_back(params.household_cardinality(k));
    log_lambda_.push_back(logs(params.lambda[k]));
  }
  for (std::size_t k = 0; k < params.phi.size(); ++k) {
    ind_card_.push_back(params.individual_cardinality(k));
    log_phi_.push_back(logs(params.phi[k]));
  }
}

double LogTables::member_log_mix(int g, std::span<const int> member) const {
  const Params& p = *params_;
  const std::size_t n_vars = member.size();
  double total = 0.0;
  for (int m = 0; m < S_; ++m) {
    double w = p.omega[g * S_ + m];
    for (std::size_t k = 0; k < n_vars && w > 0.0; ++k) w *= p.phi[k][(g * S_ + m) * ind_card_[k] + member[k]];
    total += w;
  }
  if (total > kUnderflowGuard) return std::log(total);

  // Log-space fallback.
  double terms[64];
  std::vector<double> heap;
  double* buf = terms;
  if (S_ > 64) {
    heap.resize(S_);
    buf = heap.data();
  }
  for (int m = 0; m < S_; ++m) {
    double w = log_omega_[g * S_ + m];
    for (std::size_t k = 0; k < n_vars; ++k) w += log_phi_[k][(g * S_ + m) * ind_card_[k] + member[k]];
    buf[m] = w;
  }
  return log_sum_exp(std::span<const double>(buf, S_));
}

double LogTables::household_class_log_joint(int g, const HouseholdRecord& record) const {
  double total = log_pi_[g];
  for (std::size_t k = 0; k < record.household_values.size(); ++k)
    total += log_lambda_[k][g * hh_card_[k] + record.household_values[k]];
  if (total == kNegInf) return total;
  for (const auto& member : record.members) {
    total += member_log_mix(g, member);
    if (total == kNegInf) return total;
  }
  return total;
}

double LogTables::household_log_likelihood(const HouseholdRecord& record) const {
  std::vector<double> terms(F_);
  for (int g = 0; g < F_; ++g) terms[g] = household_class_log_joint(g, record);
  return log_sum_exp(terms);
}

double household_log_likelihood(const HouseholdRecord& record, const Params& params) {
  return LogTables(params).household_log_likelihood(record);
}

double size_probability(const Params& params, const Schema& schema, int h) {
  double total = 0.0;
  for (int g = 0; g < params.F; ++g) total += params.pi[g] * params.lambda_at(schema.size_var_index, g, h - 1);
  return total;
}

double household_log_likelihood_given_size(const HouseholdRecord& record, const Params& params, const Schema& schema) {
  const int h = static_cast<int>(record.size());
  return household_log_likelihood(record, params) - std::log(size_probability(params, schema, h));
}

double marginal_probability(std::size_t k, int c, const Params& params) {
  double total = 0.0;
  for (int g = 0; g < params.F; ++g)
    for (int m = 0; m < params.S; ++m) total += params.pi[g] * params.omega_at(g, m) * params.phi_at(k, g, m, c);
  return total;
}

namespace {

double weighted_pair(std::size_t k, int c, int c_prime, const Params& params, const std::vector<double>& class_weights) {
  double total = 0.0;
  for (int g = 0; g < params.F; ++g) {
    double first = 0.0;
    double second = 0.0;
    for (int m = 0; m < params.S; ++m) {
      first += params.phi_at(k, g, m, c) * params.omega_at(g, m);
      second += params.phi_at(k, g, m, c_prime) * params.omega_at(g, m);
    }
    total += first * second * class_weights[g];
  }
  return total;
}

}  // namespace

double pair_probability(std::size_t k, int c, int c_prime, const Params& params) {
  return weighted_pair(k, c, c_prime, params, params.pi);
}

double pair_probability_given_size(std::size_t k, int c, int c_prime, const Params& params, const Schema& schema,
                                   int h) {
  std::vector<double> weights(params.F);
  double total = 0.0;
  for (int g = 0; g < params.F; ++g)
    total += weights[g] = params.pi[g] * params.lambda_at(schema.size_var_index, g, h - 1);
  if (!(total > 0.0)) throw ComputeError("no household class can generate size " + std::to_string(h));
  for (auto& w : weights) w /= total;
  return weighted_pair(k, c, c_prime, params, weights);
}

GeneratedHousehold generate_household(const Params& params, const Schema& schema, int h, Rng& rng) {
  const int F = params.F;
  const int S = params.S;
  const std::size_t size_k = schema.size_var_index;
  std::vector<double> weights(F);
  double total = 0.0;
  for (int g = 0; g < F; ++g) total += weights[g] = params.pi[g] * params.lambda_at(size_k, g, h - 1);
  if (!(total > 0.0)) throw ComputeError("no household class can generate size " + std::to_string(h));

  GeneratedHousehold out;
  out.G = static_cast<int>(rng.categorical(weights));
  const int g = out.G;
  auto& record = out.record;
  record.household_values.resize(schema.q());
  for (std::size_t k = 0; k < schema.q(); ++k) {
    if (k == size_k) {
      record.household_values[k] = h - 1;
      continue;
    }
    const int d = params.household_cardinality(k);
    record.household_values[k] =
        static_cast<int>(rng.categorical(std::span<const double>(params.lambda[k]).subspan(g * d, d)));
  }
  const auto omega_row = std::span<const double>(params.omega).subspan(g * S, S);
  out.M.resize(h);
  record.members.assign(h, std::vector<int>(schema.p()));
  for (int j = 0; j < h; ++j) out.M[j] = static_cast<int>(rng.categorical(omega_row));
  for (int j = 0; j < h; ++j) {
    const int m = out.M[j];
    for (std::size_t k = 0; k < schema.p(); ++k) {
      const int d = params.individual_cardinality(k);
      record.members[j][k] =
          static_cast<int>(rng.categorical(std::span<const double>(params.phi[k]).subspan((g * S + m) * d, d)));
    }
  }
  return out;
}

InfeasibleMass infeasible_mass_exact(const Params& params, const Schema& schema, int h, const RuleSet& rules,
                                     std::uint64_t cap) {
  const LogTables tables(params);
  const double log_size = std::log(size_probability(params, schema, h));
  double mass = 0.0;
  for_each_cell(schema, rules, h, cap, [&](const HouseholdRecord& record, bool feasible) {
    if (!feasible) mass += std::exp(tables.household_log_likelihood(record) - log_size);
  });
  return {std::clamp(mass, 0.0, 1.0), 0.0};
}

InfeasibleMass infeasible_mass_monte_carlo(const Params& params, const Schema& schema, int h, const RuleSet& rules,
                                           std::size_t draws, std::uint64_t seed) {
  if (draws == 0) throw InputError("infeasible_mass: Monte Carlo needs at least one draw");
  std::size_t infeasible = 0;
  for (std::size_t t = 0; t < draws; ++t) {
    Rng rng = Rng::derive(seed, {tag(Stream::kAugment), static_cast<std::uint64_t>(h), t});
    infeasible += !rules.feasible(generate_household(params, schema, h, rng).record);
  }
  const double p = static_cast<double>(infeasible) / static_cast<double>(draws);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(draws))};
}

}  // namespace ndpmpm
