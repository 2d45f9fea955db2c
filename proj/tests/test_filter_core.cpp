#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <set>
#include <vector>

#include "doctest.h"
#include "mupf/particle_filter.hpp"

using namespace mupf;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ParticleSet make_set(std::vector<EcefPosition> states) {
  ParticleSet p;
  p.log_weights.assign(states.size(), -std::log(static_cast<double>(states.size())));
  p.states = std::move(states);
  return p;
}

double weight_sum(const ParticleSet& p) {
  double s = 0.0;
  for (double lw : p.log_weights) s += std::exp(lw);
  return s;
}

StageDescriptor constant_stage(const char* id, double sigma, double value) {
  return {id, sigma, [value](const EcefPosition&) { return value; }};
}

bool same_states(const ParticleSet& a, const ParticleSet& b) {
  if (a.states.size() != b.states.size()) return false;
  for (std::size_t i = 0; i < a.states.size(); ++i) {
    if (!(a.states[i] == b.states[i])) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("init_particles with zero sigma collapses to the mean") {
  const GaussianPrior prior{{10.0, -4.0, 2.5}, {0.0, 0.0, 0.0}};
  const ParticleSet p = init_particles(prior, 5, 99u);
  REQUIRE(p.size() == 5);
  for (const auto& s : p.states) CHECK(s == prior.mean);
  for (double lw : p.log_weights) CHECK(std::exp(lw) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(weight_sum(p) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("init_particles sample mean tracks the prior mean") {
  const GaussianPrior prior{{100.0, 200.0, 300.0}, {2.0, 2.0, 2.0}};
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const ParticleSet p = init_particles(prior, 2000, seed);
    Vec3 mean;
    for (const auto& s : p.states) mean += s;
    mean = mean * (1.0 / 2000.0);
    // standard error 2/sqrt(2000) ~ 0.045 m, bound is > 3 sigma
    CHECK(std::abs(mean.x - 100.0) < 0.15);
    CHECK(std::abs(mean.y - 200.0) < 0.15);
    CHECK(std::abs(mean.z - 300.0) < 0.15);
    CHECK(weight_sum(p) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("predict applies the deterministic velocity shift") {
  ParticleSet p = make_set({{5.0, 5.0, 5.0}});
  const std::vector<double> weights_before = p.log_weights;
  MotionModel model;
  model.velocity = {1.0, 0.0, 0.0};
  predict(p, model, 7u);
  CHECK(p.states[0] == EcefPosition{6.0, 5.0, 5.0});
  CHECK(p.log_weights == weights_before);

  // zero velocity and zero noise leave the set bit-identical
  ParticleSet q = make_set({{1.0, 2.0, 3.0}, {-4.0, 0.5, 9.0}});
  const std::vector<EcefPosition> states_before = q.states;
  predict(q, MotionModel{}, 7u);
  CHECK(q.states == states_before);
}

TEST_CASE("predict diffusion matches the configured sigma") {
  const std::size_t n = 100000;
  ParticleSet p = make_set(std::vector<EcefPosition>(n, EcefPosition{}));
  MotionModel model;
  model.process_noise_sigma = {0.1, 0.1, 0.1};
  predict(p, model, 2024u);
  for (int axis = 0; axis < 3; ++axis) {
    double sum = 0.0, sum_sq = 0.0;
    for (const auto& s : p.states) {
      const double v = axis == 0 ? s.x : axis == 1 ? s.y : s.z;
      sum += v;
      sum_sq += v * v;
    }
    const double mean = sum / n;
    const double sd = std::sqrt(sum_sq / n - mean * mean);
    CHECK(sd == doctest::Approx(0.1).epsilon(0.02));
  }
}

TEST_CASE("weight_stage adds the log-likelihood pointwise") {
  SUBCASE("identity likelihood leaves weights bit-identical") {
    ParticleSet p = make_set({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}});
    const std::vector<double> before = p.log_weights;
    weight_stage(p, [](const EcefPosition&) { return 0.0; });
    CHECK(p.log_weights == before);
  }
  SUBCASE("ln3 vs ln1 on a uniform pair normalizes to 3:1") {
    ParticleSet p = make_set({{0, 0, 0}, {1, 0, 0}});
    weight_stage(p, [](const EcefPosition& x) { return x.x == 0.0 ? std::log(3.0) : 0.0; });
    const auto res = normalize_weights(p);
    CHECK(!res.degenerate);
    CHECK(std::exp(p.log_weights[0]) == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(std::exp(p.log_weights[1]) == doctest::Approx(0.25).epsilon(1e-12));
  }
  SUBCASE("constant shift leaves normalized weights bit-identical") {
    // dyadic weights and shift keep the additions exact, so the shift must
    // cancel without a trace in the max-subtracted normalization
    ParticleSet base = make_set({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}});
    base.log_weights = {-0.25, -1.875, -0.75};
    ParticleSet shifted = base;
    weight_stage(shifted, [](const EcefPosition&) { return 137.5; });
    normalize_weights(base);
    normalize_weights(shifted);
    CHECK(base.log_weights == shifted.log_weights);
  }
  SUBCASE("NaN and +inf likelihood values are rejected") {
    ParticleSet p = make_set({{0, 0, 0}});
    CHECK_THROWS_AS(weight_stage(p, [](const EcefPosition&) { return std::nan(""); }),
                    std::invalid_argument);
    CHECK_THROWS_AS(weight_stage(p, [](const EcefPosition&) { return kInf; }),
                    std::invalid_argument);
  }
}

TEST_CASE("normalize_weights is stable and sums to one") {
  SUBCASE("deeply negative equal weights come out exactly equal") {
    ParticleSet p = make_set({{0, 0, 0}, {1, 0, 0}});
    p.log_weights = {-1e6, -1e6};
    const auto res = normalize_weights(p);
    CHECK(!res.degenerate);
    CHECK(std::exp(p.log_weights[0]) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(std::exp(p.log_weights[1]) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(res.ess == doctest::Approx(2.0).epsilon(1e-12));
  }
  SUBCASE("ln2 and ln6 normalize to a quarter and three quarters") {
    ParticleSet p = make_set({{0, 0, 0}, {1, 0, 0}});
    p.log_weights = {std::log(2.0), std::log(6.0)};
    normalize_weights(p);
    CHECK(std::exp(p.log_weights[0]) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(std::exp(p.log_weights[1]) == doctest::Approx(0.75).epsilon(1e-15));
  }
  SUBCASE("sum is within 1e-12 of one on arbitrary finite weights") {
    Rng rng(5);
    std::uniform_real_distribution<double> u(-50.0, 10.0);
    ParticleSet p = make_set(std::vector<EcefPosition>(64));
    for (double& lw : p.log_weights) lw = u(rng);
    normalize_weights(p);
    CHECK(std::abs(weight_sum(p) - 1.0) < 1e-12);
  }
  SUBCASE("NaN weights are rejected") {
    ParticleSet p = make_set({{0, 0, 0}});
    p.log_weights = {std::nan("")};
    CHECK_THROWS_AS(normalize_weights(p), std::invalid_argument);
  }
}

TEST_CASE("normalize_weights degeneracy handling") {
  SUBCASE("all -inf with reset policy restores uniform and flags") {
    ParticleSet p = make_set({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}});
    p.log_weights.assign(4, -kInf);
    const auto res = normalize_weights(p, DegeneracyPolicy::kResetUniform, "stage_x");
    CHECK(res.degenerate);
    for (double lw : p.log_weights) CHECK(lw == -std::log(4.0));
    CHECK(res.ess == 4.0);
  }
  SUBCASE("all -inf with abort policy names the stage") {
    ParticleSet p = make_set({{0, 0, 0}, {1, 0, 0}});
    p.log_weights.assign(2, -kInf);
    try {
      normalize_weights(p, DegeneracyPolicy::kAbort, "carrier_L1");
      FAIL("expected DegeneracyError");
    } catch (const DegeneracyError& e) {
      CHECK(e.stage() == "carrier_L1");
      CHECK(std::string(e.what()).find("carrier_L1") != std::string::npos);
    }
  }
  SUBCASE("degenerate exactly when the max weight is -inf") {
    ParticleSet p = make_set({{0, 0, 0}, {1, 0, 0}});
    p.log_weights = {-kInf, -5000.0};
    const auto res = normalize_weights(p);
    CHECK(!res.degenerate);
    CHECK(std::exp(p.log_weights[1]) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(res.ess == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("resample_multinomial point mass, support, and preconditions") {
  SUBCASE("point mass yields N copies of the carrier") {
    ParticleSet p = make_set({{9, 9, 9}, {1, 1, 1}, {2, 2, 2}});
    p.log_weights = {0.0, -kInf, -kInf};
    resample_multinomial(p, 11u);
    for (const auto& s : p.states) CHECK(s == EcefPosition{9, 9, 9});
    for (double lw : p.log_weights) CHECK(lw == -std::log(3.0));
  }
  SUBCASE("output states come from the input support") {
    ParticleSet p = make_set({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}});
    const std::vector<EcefPosition> support = p.states;
    resample_multinomial(p, 12u);
    for (const auto& s : p.states) {
      CHECK(std::find(support.begin(), support.end(), s) != support.end());
    }
  }
  SUBCASE("unnormalized weights are rejected") {
    ParticleSet p = make_set({{0, 0, 0}, {1, 0, 0}});
    p.log_weights = {0.0, 0.0};  // sums to 2
    CHECK_THROWS_AS(resample_multinomial(p, 1u), std::logic_error);
  }
}

TEST_CASE("resample_multinomial frequencies respect the weights") {
  const std::size_t n = 100000;
  ParticleSet p;
  p.states.assign(n, EcefPosition{});
  p.states[0] = {1, 0, 0};  // all others at origin; weight mass 0.7 on particle 0
  p.log_weights.assign(n, -kInf);
  p.log_weights[0] = std::log(0.7);
  p.log_weights[1] = std::log(0.3);
  p.states[1] = {2, 0, 0};
  resample_multinomial(p, 20240229u);
  std::size_t count0 = 0;
  for (const auto& s : p.states) count0 += s == EcefPosition{1, 0, 0} ? 1 : 0;
  const double expect = 0.7 * n;
  const double bound = 4.0 * std::sqrt(0.7 * 0.3 * n);
  CHECK(std::abs(static_cast<double>(count0) - expect) < bound);
}

TEST_CASE("single-stage updates coincide across all strategies") {
  const GaussianPrior prior{{2.0, -1.0, 0.5}, {1.0, 1.0, 1.0}};
  UpdateSchedule schedule;
  schedule.stages.push_back({"only", 0.3, [](const EcefPosition& x) {
                               const Vec3 d = x - EcefPosition{2.1, -0.9, 0.4};
                               return -dot(d, d) / (2.0 * 0.3 * 0.3);
                             }});
  FilterConfig config;
  config.annealing_exponents = {1.0};

  ParticleSet a = init_particles(prior, 200, 31u);
  ParticleSet b = a;
  ParticleSet c = a;
  Rng ra(77u), rb(77u), rc(77u);
  update_normal(a, schedule, config, ra);
  update_multiple(b, schedule, config, rb);
  update_annealed(c, schedule, config, rc);
  CHECK(same_states(a, b));
  CHECK(same_states(a, c));
  CHECK(a.log_weights == b.log_weights);
  CHECK(a.log_weights == c.log_weights);
}

TEST_CASE("update_multiple rejects malformed schedules") {
  ParticleSet p = init_particles({{0, 0, 0}, {1, 1, 1}}, 16, 3u);
  FilterConfig config;
  Rng rng(1u);

  UpdateSchedule ascending;
  ascending.stages.push_back(constant_stage("sharp", 0.01, 0.0));
  ascending.stages.push_back(constant_stage("broad", 0.5, 0.0));
  CHECK_THROWS_AS(update_multiple(p, ascending, config, rng), ScheduleError);

  UpdateSchedule empty;
  CHECK_THROWS_AS(update_multiple(p, empty, config, rng), ScheduleError);
  CHECK_THROWS_AS(update_normal(p, empty, config, rng), ScheduleError);
  CHECK_THROWS_AS(update_annealed(p, empty, config, rng), ScheduleError);

  UpdateSchedule bad_sigma;
  bad_sigma.stages.push_back(constant_stage("zero", 0.0, 0.0));
  CHECK_THROWS_AS(update_multiple(p, bad_sigma, config, rng), ScheduleError);

  UpdateSchedule no_eval;
  no_eval.stages.push_back({"hollow", 0.5, nullptr});
  CHECK_THROWS_AS(update_multiple(p, no_eval, config, rng), ScheduleError);
}

TEST_CASE("annealing exponents are validated") {
  ParticleSet p = init_particles({{0, 0, 0}, {1, 1, 1}}, 8, 3u);
  UpdateSchedule schedule;
  schedule.stages.push_back(constant_stage("s", 0.5, 0.0));
  FilterConfig config;
  Rng rng(1u);

  for (const auto& bad : std::vector<std::vector<double>>{
           {}, {0.5}, {0.2, 0.1, 1.0}, {0.0, 0.5, 1.0}, {-0.1, 1.0}, {0.5, 1.0000001}}) {
    config.annealing_exponents = bad;
    CHECK_THROWS_AS(update_annealed(p, schedule, config, rng), std::invalid_argument);
  }

  config.annealing_exponents = {0.125, 0.25, 0.5, 1.0};
  CHECK_NOTHROW(update_annealed(p, schedule, config, rng));
  // the applied increments telescope back to the full likelihood power
  CHECK(0.125 + (0.25 - 0.125) + (0.5 - 0.25) + (1.0 - 0.5) == 1.0);
}

TEST_CASE("constant likelihoods reduce an update to pure resampling") {
  const GaussianPrior prior{{0, 0, 0}, {1, 1, 1}};
  UpdateSchedule schedule;
  schedule.stages.push_back(constant_stage("broad", 0.5, -1.25));
  schedule.stages.push_back(constant_stage("sharp", 0.1, 3.5));
  FilterConfig config;
  config.regularization_scale = 0.0;

  ParticleSet via_normal = init_particles(prior, 100, 41u);
  ParticleSet manual = via_normal;
  Rng ru(13u), rm(13u);
  update_normal(via_normal, schedule, config, ru);
  resample_multinomial(manual, rm);
  CHECK(same_states(via_normal, manual));

  ParticleSet via_multiple = init_particles(prior, 100, 41u);
  ParticleSet manual2 = via_multiple;
  Rng r2(13u), r3(13u);
  update_multiple(via_multiple, schedule, config, r2);
  resample_multinomial(manual2, r3);
  resample_multinomial(manual2, r3);
  CHECK(same_states(via_multiple, manual2));
}

TEST_CASE("between-stage roughening") {
  UpdateSchedule schedule;
  schedule.stages.push_back(constant_stage("broad", 1.0, 0.0));
  schedule.stages.push_back(constant_stage("sharp", 0.5, 0.0));
  FilterConfig config;  // default regularization_scale > 0

  SUBCASE("a collapsed cloud stays exactly in place") {
    ParticleSet p = make_set(std::vector<EcefPosition>(5, EcefPosition{7.0, -2.0, 1.0}));
    Rng rng(9u);
    update_multiple(p, schedule, config, rng);
    for (const auto& s : p.states) CHECK(s == EcefPosition{7.0, -2.0, 1.0});
  }
  SUBCASE("a spread cloud gains states outside the input support") {
    ParticleSet p = init_particles({{0, 0, 0}, {1, 1, 1}}, 100, 17u);
    std::set<double> support;
    for (const auto& s : p.states) support.insert(s.x);
    Rng rng(9u);
    update_multiple(p, schedule, config, rng);
    bool any_new = false;
    for (const auto& s : p.states) any_new = any_new || !support.count(s.x);
    CHECK(any_new);
  }
  SUBCASE("the final stage is never roughened") {
    // single-stage schedule: multiple-update output equals a plain resample
    UpdateSchedule single;
    single.stages.push_back(constant_stage("only", 1.0, 0.0));
    ParticleSet p = init_particles({{0, 0, 0}, {1, 1, 1}}, 50, 23u);
    ParticleSet manual = p;
    Rng ra(5u), rb(5u);
    update_multiple(p, single, config, ra);
    resample_multinomial(manual, rb);
    CHECK(same_states(p, manual));
  }
}

TEST_CASE("normal update degenerates where the staged update survives") {
  // Broad unimodal stage plus a sharp hard-support bimodal stage. The prior
  // sits outside the sharp support, so the product likelihood is -inf at
  // every particle, while the staged pipeline walks in via the broad stage.
  const auto broad = [](const EcefPosition& x) { return -x.x * x.x / 2.0; };
  const auto sharp = [](const EcefPosition& x) {
    const bool in_lobe = std::abs(x.x) < 0.5 || std::abs(x.x - 10.0) < 0.5;
    return in_lobe ? 0.0 : -kInf;
  };
  UpdateSchedule schedule;
  schedule.stages.push_back({"broad", 1.0, broad});
  schedule.stages.push_back({"sharp", 0.01, sharp});

  const GaussianPrior prior{{3.5, 0.0, 0.0}, {1.0, 0.0, 0.0}};
  FilterConfig config;

  ParticleSet for_normal = init_particles(prior, 60, 101u);
  ParticleSet for_multiple = for_normal;

  Rng rn(55u);
  const UpdateDiagnostics dn = update_normal(for_normal, schedule, config, rn);
  CHECK(dn.any_degenerate());
  CHECK(dn.stages.front().stage_id == "combined");

  Rng rm(55u);
  const UpdateDiagnostics dm = update_multiple(for_multiple, schedule, config, rm);
  CHECK(!dm.any_degenerate());
  const EcefPosition est = estimate_state(for_multiple);
  CHECK(std::abs(est.x) < 1.0);  // settled into the near lobe

  ParticleSet for_abort = init_particles(prior, 60, 101u);
  FilterConfig abort_config;
  abort_config.degeneracy_policy = DegeneracyPolicy::kAbort;
  Rng ra(55u);
  CHECK_THROWS_AS(update_normal(for_abort, schedule, abort_config, ra), DegeneracyError);
}

TEST_CASE("estimate_state examples") {
  SUBCASE("single particle is the identity") {
    ParticleSet p = make_set({{1, 2, 3}});
    CHECK(estimate_state(p) == EcefPosition{1, 2, 3});
  }
  SUBCASE("uniform pair averages") {
    ParticleSet p = make_set({{0, 0, 0}, {2, 0, 0}});
    CHECK(estimate_state(p) == EcefPosition{1, 0, 0});
  }
  SUBCASE("quarter/three-quarter pair lands at 1.5") {
    ParticleSet p = make_set({{0, 0, 0}, {2, 0, 0}});
    p.log_weights = {std::log(0.25), std::log(0.75)};
    const EcefPosition est = estimate_state(p);
    CHECK(est.x == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(est.y == 0.0);
    CHECK(est.z == 0.0);
  }
  SUBCASE("degenerate set raises") {
    ParticleSet p = make_set({{0, 0, 0}});
    p.log_weights = {-kInf};
    CHECK_THROWS_AS(estimate_state(p), DegeneracyError);
    CHECK_THROWS_AS(estimate_state(ParticleSet{}), std::invalid_argument);
  }
}

TEST_CASE("effective_sample_size spans uniform to point mass") {
  ParticleSet uniform = make_set(std::vector<EcefPosition>(8));
  CHECK(effective_sample_size(uniform) == doctest::Approx(8.0).epsilon(1e-12));

  ParticleSet point = make_set(std::vector<EcefPosition>(8));
  point.log_weights.assign(8, -kInf);
  point.log_weights[3] = 0.0;
  CHECK(effective_sample_size(point) == doctest::Approx(1.0).epsilon(1e-12));

  ParticleSet degenerate = make_set(std::vector<EcefPosition>(4));
  degenerate.log_weights.assign(4, -kInf);
  CHECK(effective_sample_size(degenerate) == 0.0);
}

TEST_CASE("seeded pipelines are bit-reproducible") {
  const GaussianPrior prior{{5, 5, 5}, {2, 2, 2}};
  UpdateSchedule schedule;
  schedule.stages.push_back({"pull", 0.4, [](const EcefPosition& x) {
                               const Vec3 d = x - EcefPosition{5.2, 4.9, 5.1};
                               return -dot(d, d) / (2.0 * 0.4 * 0.4);
                             }});
  const auto run = [&] {
    ParticleSet p = init_particles(prior, 300, 71u);
    MotionModel motion;
    motion.process_noise_sigma = {0.02, 0.02, 0.02};
    Rng rng(72u);
    predict(p, motion, rng);
    FilterConfig config;
    update_multiple(p, schedule, config, rng);
    return estimate_state(p);
  };
  const EcefPosition a = run();
  const EcefPosition b = run();
  CHECK(a == b);
}

TEST_CASE("strategy and policy names round-trip") {
  for (Strategy s : {Strategy::kNormal, Strategy::kMultipleUpdate, Strategy::kAnnealed}) {
    CHECK(strategy_from_name(strategy_name(s)) == s);
  }
  CHECK_THROWS_AS(strategy_from_name("bogus"), std::invalid_argument);
  for (DegeneracyPolicy p : {DegeneracyPolicy::kResetUniform, DegeneracyPolicy::kAbort}) {
    CHECK(degeneracy_policy_from_name(degeneracy_policy_name(p)) == p);
  }
  CHECK_THROWS_AS(degeneracy_policy_from_name("bogus"), std::invalid_argument);
}
