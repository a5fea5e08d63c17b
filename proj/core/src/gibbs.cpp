#include "ndpmpm/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "ndpmpm/error.hpp"
#include "ndpmpm/parallel.hpp"
#include "ndpmpm/rules.hpp"
#include "ndpmpm/truncated.hpp"

namespace ndpmpm {

void ChainConfig::validate() const {
  if (iterations == 0) throw InputError("chain: iterations must be positive");
  if (burn_in >= iterations) throw InputError("chain: burn_in must be smaller than iterations");
  if (thin < 1) throw InputError("chain: thin must be at least 1");
  if (threads < 1) throw InputError("chain: threads must be at least 1");
  if (augment_cap_factor < 1) throw InputError("chain: augment_cap_factor must be at least 1");
}

// ---- counts ----

ClassCounts::ClassCounts(const Params& shape)
    : F_(shape.F), S_(shape.S), households_(shape.F, 0.0), individuals_(static_cast<std::size_t>(shape.F) * shape.S, 0.0) {
  for (std::size_t k = 0; k < shape.lambda.size(); ++k) {
    hh_card_.push_back(shape.household_cardinality(k));
    lambda_.emplace_back(shape.lambda[k].size(), 0.0);
  }
  for (std::size_t k = 0; k < shape.phi.size(); ++k) {
    ind_card_.push_back(shape.individual_cardinality(k));
    phi_.emplace_back(shape.phi[k].size(), 0.0);
  }
}

void ClassCounts::add(const HouseholdRecord& record, int G, const std::vector<int>& M) {
  households_[G] += 1.0;
  for (std::size_t k = 0; k < hh_card_.size(); ++k) lambda_[k][G * hh_card_[k] + record.household_values[k]] += 1.0;
  for (std::size_t j = 0; j < record.members.size(); ++j) {
    const int gm = G * S_ + M[j];
    individuals_[gm] += 1.0;
    for (std::size_t k = 0; k < ind_card_.size(); ++k) phi_[k][gm * ind_card_[k] + record.members[j][k]] += 1.0;
  }
}

ClassCounts tally(const Dataset& data, const LatentState& latent, const Params& shape) {
  ClassCounts counts(shape);
  for (std::size_t i = 0; i < data.households.size(); ++i) counts.add(data.households[i], latent.G[i], latent.M[i]);
  return counts;
}

ChainState initial_state(const Dataset& data, const Hyperparams& hyper, std::uint64_t seed) {
  hyper.validate(data.schema);
  ChainState state;
  Rng prior_rng = Rng::derive(seed, {0, tag(Stream::kInit), 0});
  state.params = prior_draw(hyper, prior_rng);
  Rng latent_rng = Rng::derive(seed, {0, tag(Stream::kInit), 1});
  state.latent.G.resize(data.households.size());
  state.latent.M.resize(data.households.size());
  for (std::size_t i = 0; i < data.households.size(); ++i) {
    state.latent.G[i] = static_cast<int>(latent_rng.below(hyper.F));
    state.latent.M[i].resize(data.households[i].size());
    for (auto& m : state.latent.M[i]) m = static_cast<int>(latent_rng.below(hyper.S));
  }
  return state;
}

// ---- latent classes ----

void sample_G(const Dataset& data, ChainState& state, const SweepContext& ctx) {
  const Params& params = state.params;
  const LogTables tables(params);
  const int F = params.F;
  parallel_for(data.households.size(), ctx.threads, [&](std::size_t i) {
    if (F == 1) {
      state.latent.G[i] = 0;
      return;
    }
    std::vector<double> log_w(F);
    for (int g = 0; g < F; ++g) log_w[g] = tables.household_class_log_joint(g, data.households[i]);
    Rng rng = ctx.stream(Stream::kLatentG, i);
    state.latent.G[i] = static_cast<int>(rng.categorical_log(log_w));
  });
}

void sample_M(const Dataset& data, ChainState& state, const SweepContext& ctx) {
  const Params& params = state.params;
  const LogTables tables(params);
  const int S = params.S;
  const std::size_t p = data.schema.p();
  parallel_for(data.households.size(), ctx.threads, [&](std::size_t i) {
    const auto& record = data.households[i];
    auto& M = state.latent.M[i];
    M.resize(record.size());
    if (S == 1) {
      std::fill(M.begin(), M.end(), 0);
      return;
    }
    const int g = state.latent.G[i];
    Rng rng = ctx.stream(Stream::kLatentM, i);
    std::vector<double> w(S);
    for (std::size_t j = 0; j < record.size(); ++j) {
      const auto& member = record.members[j];
      double total = 0.0;
      for (int m = 0; m < S; ++m) {
        double x = params.omega_at(g, m);
        for (std::size_t k = 0; k < p; ++k) x *= params.phi_at(k, g, m, member[k]);
        total += w[m] = x;
      }
      if (total > 1e-250) {
        M[j] = static_cast<int>(rng.categorical(w));
      } else {
        for (int m = 0; m < S; ++m) {
          double x = tables.log_omega(g, m);
          for (std::size_t k = 0; k < p; ++k) x += tables.log_phi(k, g, m, member[k]);
          w[m] = x;
        }
        M[j] = static_cast<int>(rng.categorical_log(w));
      }
    }
  });
}

// ---- sticks ----

void sample_household_sticks(const ClassCounts& counts, Params& params, const SweepContext& ctx) {
  const int F = params.F;
  Rng rng = ctx.stream(Stream::kHouseholdSticks);
  double above = 0.0;  // households in classes f > g
  for (int g = 0; g < F; ++g) above += counts.households(g);
  params.log1m_u.assign(F, -std::numeric_limits<double>::infinity());
  for (int g = 0; g + 1 < F; ++g) {
    above -= counts.households(g);
    const auto draw = rng.beta_split(1.0 + counts.households(g), params.alpha + above);
    params.u[g] = draw.value;
    params.log1m_u[g] = draw.log_complement;
  }
  params.u[F - 1] = 1.0;
  params.pi = stick_break(params.u);
}

void sample_individual_sticks(const ClassCounts& counts, Params& params, const SweepContext& ctx) {
  const int F = params.F;
  const int S = params.S;
  Rng rng = ctx.stream(Stream::kIndividualSticks);
  params.log1m_v.assign(params.v.size(), -std::numeric_limits<double>::infinity());
  for (int g = 0; g < F; ++g) {
    double above = 0.0;
    for (int m = 0; m < S; ++m) above += counts.individuals(g, m);
    for (int m = 0; m + 1 < S; ++m) {
      above -= counts.individuals(g, m);
      const auto draw = rng.beta_split(1.0 + counts.individuals(g, m), params.beta_for(g) + above);
      params.v[g * S + m] = draw.value;
      params.log1m_v[g * S + m] = draw.log_complement;
    }
    params.v[g * S + S - 1] = 1.0;
    const auto row = stick_break(std::span<const double>(params.v).subspan(g * S, S));
    std::copy(row.begin(), row.end(), params.omega.begin() + g * S);
  }
}

// ---- kernels ----

void sample_lambda(const ClassCounts& counts, const Hyperparams& hyper, Params& params, const SweepContext& ctx) {
  const int F = params.F;
  const std::size_t q = params.lambda.size();
  parallel_for(q * F, ctx.threads, [&](std::size_t index) {
    const std::size_t k = index / F;
    const int g = static_cast<int>(index % F);
    const auto& prior = hyper.household_weights[k];
    const std::size_t d = prior.size();
    std::vector<double> w(d);
    for (std::size_t c = 0; c < d; ++c) w[c] = prior[c] + counts.lambda_counts(k)[g * d + c];
    Rng rng = ctx.stream(Stream::kLambda, index);
    rng.dirichlet(w, std::span<double>(params.lambda[k]).subspan(g * d, d));
  });
}

void sample_phi(const ClassCounts& counts, const Hyperparams& hyper, Params& params, const SweepContext& ctx) {
  const std::size_t FS = static_cast<std::size_t>(params.F) * params.S;
  const std::size_t p = params.phi.size();
  parallel_for(p * FS, ctx.threads, [&](std::size_t index) {
    const std::size_t k = index / FS;
    const std::size_t gm = index % FS;
    const auto& prior = hyper.individual_weights[k];
    const std::size_t d = prior.size();
    std::vector<double> w(d);
    for (std::size_t c = 0; c < d; ++c) w[c] = prior[c] + counts.phi_counts(k)[gm * d + c];
    Rng rng = ctx.stream(Stream::kPhi, index);
    rng.dirichlet(w, std::span<double>(params.phi[k]).subspan(gm * d, d));
  });
}

// ---- concentrations ----

namespace {

// Exact complement when the draw recorded it, otherwise the floored value from the stick.
double log_complement(const std::vector<double>& sticks, const std::vector<double>& log1m, std::size_t i) {
  if (log1m.size() == sticks.size()) return log1m[i];
  return std::log(std::max(1.0 - sticks[i], kStickComplementFloor));
}

}  // namespace

void sample_alpha(const Hyperparams& hyper, Params& params, const SweepContext& ctx) {
  const int F = params.F;
  double log_sum = 0.0;
  for (int g = 0; g + 1 < F; ++g) log_sum += log_complement(params.u, params.log1m_u, g);
  Rng rng = ctx.stream(Stream::kAlpha);
  params.alpha = rng.gamma_rate(hyper.a_alpha + F - 1, hyper.b_alpha - log_sum);
}

void sample_beta(const Hyperparams& hyper, Params& params, const SweepContext& ctx) {
  const int F = params.F;
  const int S = params.S;
  Rng rng = ctx.stream(Stream::kBeta);
  if (hyper.beta_mode == BetaMode::kCommon) {
    double log_sum = 0.0;
    for (int g = 0; g < F; ++g)
      for (int m = 0; m + 1 < S; ++m) log_sum += log_complement(params.v, params.log1m_v, g * S + m);
    params.beta.assign(1, rng.gamma_rate(hyper.a_beta + static_cast<double>(F) * (S - 1), hyper.b_beta - log_sum));
    return;
  }
  params.beta.resize(F);
  for (int g = 0; g < F; ++g) {
    double log_sum = 0.0;
    for (int m = 0; m + 1 < S; ++m) log_sum += log_complement(params.v, params.log1m_v, g * S + m);
    params.beta[g] = rng.gamma_rate(hyper.a_beta + S - 1, hyper.b_beta - log_sum);
  }
}

void sample_parameters(const ClassCounts& counts, const Hyperparams& hyper, Params& params, const SweepContext& ctx) {
  sample_household_sticks(counts, params, ctx);
  sample_individual_sticks(counts, params, ctx);
  sample_lambda(counts, hyper, params, ctx);
  sample_phi(counts, hyper, params, ctx);
  sample_alpha(hyper, params, ctx);
  sample_beta(hyper, params, ctx);
}

void gibbs_sweep(const Dataset& data, const Hyperparams& hyper, ChainState& state, int threads, std::uint64_t seed) {
  ++state.iteration;
  const SweepContext ctx{seed, state.iteration, threads};
  sample_G(data, state, ctx);
  sample_M(data, state, ctx);
  const ClassCounts counts = tally(data, state.latent, state.params);
  sample_parameters(counts, hyper, state.params, ctx);
}

// ---- diagnostics ----

IterationDiagnostics occupancy(const Dataset& data, const ChainState& state) {
  const int F = state.params.F;
  const int S = state.params.S;
  std::vector<char> household(F, 0);
  std::vector<char> individual(static_cast<std::size_t>(F) * S, 0);
  for (std::size_t i = 0; i < data.households.size(); ++i) {
    const int g = state.latent.G[i];
    household[g] = 1;
    for (int m : state.latent.M[i]) individual[g * S + m] = 1;
  }
  IterationDiagnostics diag;
  diag.iteration = state.iteration;
  for (int g = 0; g < F; ++g) {
    if (!household[g]) continue;
    ++diag.occupied_household;
    int within = 0;
    for (int m = 0; m < S; ++m) within += individual[g * S + m];
    diag.occupied_individual = std::max(diag.occupied_individual, within);
  }
  diag.alpha = state.params.alpha;
  diag.beta = state.params.beta;
  diag.pi = state.params.pi;
  return diag;
}

void write_diagnostics_csv(std::ostream& out, const Diagnostics& diagnostics) {
  if (diagnostics.iterations.empty()) return;
  const auto& first = diagnostics.iterations.front();
  out << "iteration,occupied_household,occupied_individual,alpha";
  if (first.beta.size() == 1) {
    out << ",beta";
  } else {
    for (std::size_t g = 0; g < first.beta.size(); ++g) out << ",beta_" << g + 1;
  }
  for (std::size_t g = 0; g < first.pi.size(); ++g) out << ",pi_" << g + 1;
  const bool truncated = !first.augmented.empty();
  if (truncated) {
    for (const auto& [h, n0] : first.augmented) out << ",n0_" << h;
    out << ",n0,cap_exceeded";
  }
  out << '\n';
  out.precision(17);
  for (const auto& it : diagnostics.iterations) {
    out << it.iteration << ',' << it.occupied_household << ',' << it.occupied_individual << ',' << it.alpha;
    for (double b : it.beta) out << ',' << b;
    for (double x : it.pi) out << ',' << x;
    if (truncated) {
      std::size_t total = 0;
      for (const auto& [h, n0] : it.augmented) {
        out << ',' << n0;
        total += n0;
      }
      out << ',' << total << ',' << (it.cap_exceeded ? 1 : 0);
    }
    out << '\n';
  }
}

// ---- driver ----

Diagnostics run_chain(const Dataset& data, const Hyperparams& hyper, const ChainConfig& config, const RuleSet* rules,
                      const CheckpointSink& sink, const CaptureSink& capture) {
  config.validate();
  hyper.validate(data.schema);
  const bool truncated = rules != nullptr && !rules->empty();
  if (truncated) {
    for (const auto& h : data.households)
      if (!rules->feasible(h))
        throw InputError("observed household '" + h.household_id + "' violates the structural-zero rules");
  }

  ChainState state = initial_state(data, hyper, config.seed);
  AugmentedBatch batch;
  const SizeHistogram histogram = size_histogram(data);
  Diagnostics diagnostics;
  const std::size_t cap = config.augment_cap_factor * std::max<std::size_t>(data.households.size(), 1);

  for (std::size_t t = 1; t <= config.iterations; ++t) {
    bool cap_hit = false;
    if (truncated) {
      cap_hit = truncated_sweep(data, hyper, *rules, state, batch, config.threads, config.seed, cap).cap_exceeded;
    } else {
      gibbs_sweep(data, hyper, state, config.threads, config.seed);
    }

    IterationDiagnostics diag = occupancy(data, state);
    if (truncated) {
      for (const auto& [h, count] : histogram) diag.augmented[h] = 0;
      for (const auto& stratum : batch.strata) diag.augmented[stratum.h] = stratum.infeasible.size();
      diag.cap_exceeded = cap_hit;
      diagnostics.cap_exceeded_count += cap_hit;
    }
    diagnostics.iterations.push_back(std::move(diag));

    if (truncated && capture &&
        std::find(config.capture_iterations.begin(), config.capture_iterations.end(), t) !=
            config.capture_iterations.end())
      capture(t, batch);

    if (t > config.burn_in && (t - config.burn_in) % config.thin == 0 && sink) {
      Checkpoint checkpoint{t, state.params, std::nullopt};
      if (config.save_latent) checkpoint.latent = state.latent;
      sink(checkpoint);
    }
  }

  int max_household = 0;
  int max_individual = 0;
  for (const auto& it : diagnostics.iterations) {
    if (it.iteration <= config.burn_in) continue;
    max_household = std::max(max_household, it.occupied_household);
    max_individual = std::max(max_individual, it.occupied_individual);
  }
  if (hyper.F > 1 && max_household >= hyper.F)
    diagnostics.warnings.push_back("occupied household classes reached F=" + std::to_string(hyper.F) +
                                   "; consider increasing F");
  if (hyper.S > 1 && max_individual >= hyper.S)
    diagnostics.warnings.push_back("occupied individual classes reached S=" + std::to_string(hyper.S) +
                                   "; consider increasing F, then S");
  if (diagnostics.cap_exceeded_count > 0)
    diagnostics.warnings.push_back("augmentation cap exceeded in " + std::to_string(diagnostics.cap_exceeded_count) +
                                   " iterations; previous augmented batch reused");
  return diagnostics;
}

}  // namespace ndpmpm
