#include "swapcomb/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "swapcomb/error.hpp"
#include "swapcomb/geometry.hpp"
#include "swapcomb/linalg.hpp"

namespace swapcomb {

namespace {

double real_pow(std::size_t base, double e) { return std::pow(static_cast<double>(base), e); }

void check_schedule(std::size_t H, std::size_t k) {
  if (H < 2) throw Error(ErrorCode::kInvalidArgument, "schedule needs H >= 2");
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "schedule needs k >= 1");
}

double default_gamma(std::size_t H, std::optional<double> gamma) {
  const double g = gamma.value_or(real_pow(H, -1.0 / 3.0));
  if (!(g > 0.0 && g <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "gamma must lie in (0, 1]");
  return g;
}

std::vector<Atom> log_weights_to_atoms(const std::vector<Action>& actions, const Vector& log_w) {
  const double top = *std::max_element(log_w.begin(), log_w.end());
  std::vector<Atom> atoms;
  atoms.reserve(actions.size());
  double total = 0.0;
  for (std::size_t j = 0; j < actions.size(); ++j) {
    const double w = std::exp(log_w[j] - top);
    atoms.push_back({actions[j], w});
    total += w;
  }
  for (auto& a : atoms) a.weight /= total;
  return atoms;
}

}  // namespace

const char* to_string(ScheduleMode mode) {
  return mode == ScheduleMode::kTheory ? "theory" : "practical";
}

std::size_t saturating_pow(std::size_t base, std::size_t exponent) {
  std::size_t out = 1;
  for (std::size_t i = 0; i < exponent; ++i) {
    if (base != 0 && out > std::numeric_limits<std::size_t>::max() / base) {
      return std::numeric_limits<std::size_t>::max();
    }
    out *= base;
  }
  return out;
}

std::size_t truncated_meta_days(std::size_t T, std::size_t H, std::size_t k, std::size_t l) {
  const std::size_t span = saturating_pow(H, k);
  const std::size_t meta = saturating_pow(H, k - 1);
  const bool saturated = span == std::numeric_limits<std::size_t>::max();
  const std::size_t complete = saturated ? 0 : T / span;
  if (l <= complete) return H;
  const std::size_t rest = T - complete * (saturated ? 0 : span);
  return rest / meta + (rest % meta != 0 ? 1 : 0);
}

std::shared_ptr<const LearnerContext> make_learner_context(const ActionSet& set, double spanner_C,
                                                           bool enumerate_actions,
                                                           std::size_t enumeration_cap) {
  if (!set.fixed_weight()) {
    throw Error(ErrorCode::kInvalidArgument,
                "lazy learners need a fixed-weight action set (level DAG paths first)");
  }
  auto ctx = std::make_shared<LearnerContext>();
  ctx->set = &set;
  ctx->spanner = build_spanner(set, spanner_C);
  ctx->exploration = exploration_policy(ctx->spanner);
  ctx->lambda_mu = min_nonzero_eigenvalue(co_occurrence(ctx->exploration));
  const std::size_t d = set.dim();
  const Vector uniform(d, 1.0 / static_cast<double>(d));
  ctx->initial_q = polytope_violation(set, uniform) <= 1e-12 ? uniform : kl_project(set, uniform);
  ctx->initial_decomposition = decompose(set, ctx->initial_q);
  if (enumerate_actions) ctx->actions = set.enumerate(enumeration_cap);
  return ctx;
}

ScheduleParams combcp_theory_schedule(const LearnerContext& ctx, std::size_t H, std::size_t k) {
  check_schedule(H, k);
  const double d = static_cast<double>(ctx.set->dim());
  const double m = static_cast<double>(ctx.set->weight());
  ScheduleParams p;
  p.H = H;
  p.k = k;
  p.mode = ScheduleMode::kTheory;
  p.gamma = real_pow(H, -1.0 / 3.0);
  p.eta = 1.0 / (d * d * d * std::sqrt(m) * real_pow(H, static_cast<double>(k) - 1.0 / 3.0));
  return p;
}

ScheduleParams comband_theory_schedule(const LearnerContext& ctx, std::size_t H, std::size_t k) {
  check_schedule(H, k);
  const double m = static_cast<double>(ctx.set->weight());
  ScheduleParams p;
  p.H = H;
  p.k = k;
  p.mode = ScheduleMode::kTheory;
  p.gamma = real_pow(H, -1.0 / 3.0);
  p.eta = ctx.lambda_mu / (real_pow(H, static_cast<double>(k) - 1.0 / 3.0) * m);
  return p;
}

ScheduleParams combcp_practical_schedule(const LearnerContext& ctx, std::size_t H, std::size_t k,
                                         std::optional<double> gamma, double eta_c, bool cap) {
  check_schedule(H, k);
  if (!(eta_c > 0.0)) throw Error(ErrorCode::kInvalidArgument, "eta_c must be positive");
  const double d = static_cast<double>(ctx.set->dim());
  const double m = static_cast<double>(ctx.set->weight());
  ScheduleParams p;
  p.H = H;
  p.k = k;
  p.gamma = default_gamma(H, gamma);
  const double rate = eta_c / (d * std::sqrt(m) * real_pow(H, static_cast<double>(k) - 1.0 / 3.0));
  const double limit = p.gamma * ctx.lambda_mu / (static_cast<double>(p.meta_day_length()) * std::sqrt(m));
  p.eta = cap ? std::min(rate, limit) : rate;
  return p;
}

ScheduleParams comband_practical_schedule(const LearnerContext& ctx, std::size_t H, std::size_t k,
                                          std::optional<double> gamma, double eta_c, bool cap) {
  check_schedule(H, k);
  if (!(eta_c > 0.0)) throw Error(ErrorCode::kInvalidArgument, "eta_c must be positive");
  const double m = static_cast<double>(ctx.set->weight());
  ScheduleParams p;
  p.H = H;
  p.k = k;
  p.gamma = default_gamma(H, gamma);
  const double rate = eta_c * ctx.lambda_mu / (real_pow(H, static_cast<double>(k) - 1.0 / 3.0) * m);
  const double limit = p.gamma * ctx.lambda_mu / (static_cast<double>(p.meta_day_length()) * m);
  p.eta = cap ? std::min(rate, limit) : rate;
  return p;
}

LazyLearner::LazyLearner(ScheduleParams params, std::size_t dim, std::size_t planned_meta_days)
    : params_(params), acc_(dim, 0.0), planned_(planned_meta_days) {}

void LazyLearner::set_policy(Policy p) {
  policy_ = std::move(p);
  ++version_;
}

void LazyLearner::ingest(std::span<const double> estimate) {
  for (std::size_t i = 0; i < acc_.size(); ++i) acc_[i] += estimate[i];
  ++tau_;
  if (tau_ == params_.meta_day_length()) {
    meta_update(acc_);
    ++updates_;
    std::fill(acc_.begin(), acc_.end(), 0.0);
    tau_ = 0;
    ++h_;
  }
}

LazyComBCP::LazyComBCP(std::shared_ptr<const LearnerContext> ctx, ScheduleParams params,
                       std::size_t planned_meta_days)
    : LazyLearner(params, ctx->set->dim(), planned_meta_days), ctx_(std::move(ctx)), q_(ctx_->initial_q) {
  rebuild_policy(ctx_->initial_decomposition);
}

void LazyComBCP::rebuild_policy(const Policy& decomposition) {
  set_policy(Policy::mix(decomposition, ctx_->exploration, params().gamma));
}

void LazyComBCP::meta_update(const Vector& acc) {
  const double eta = params().eta;
  const double size = norm_inf(acc);
  if (eta * size > 1.0) {
    std::ostringstream os;
    os << "eta * ||X||_inf = " << eta * size << " > 1 (eta=" << eta << ", ||X||_inf=" << size
       << ", k=" << params().k << ", h=" << meta_day() << ")";
    throw Error(ErrorCode::kOmdPreconditionViolated, os.str());
  }
  if (size == 0.0) return;
  Vector raw(q_.size());
  for (std::size_t i = 0; i < q_.size(); ++i) {
    raw[i] = std::max(q_[i] * std::exp(eta * acc[i]), std::numeric_limits<double>::min());
  }
  q_ = kl_project(*ctx_->set, raw);
  rebuild_policy(decompose(*ctx_->set, q_));
}

LazyComBand::LazyComBand(std::shared_ptr<const LearnerContext> ctx, ScheduleParams params,
                         std::size_t planned_meta_days)
    : LazyLearner(params, ctx->set->dim(), planned_meta_days), ctx_(std::move(ctx)) {
  if (ctx_->actions.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "LazyComBand needs an enumerated action set");
  }
  log_w_.assign(ctx_->actions.size(), 0.0);
  rebuild_policy();
}

Vector LazyComBand::weights() const {
  Vector out;
  for (const auto& a : log_weights_to_atoms(ctx_->actions, log_w_)) out.push_back(a.weight);
  return out;
}

void LazyComBand::rebuild_policy() {
  Policy p(log_weights_to_atoms(ctx_->actions, log_w_));
  set_policy(Policy::mix(p, ctx_->exploration, params().gamma));
}

void LazyComBand::meta_update(const Vector& acc) {
  const double eta = params().eta;
  double size = 0.0;
  Vector gain(ctx_->actions.size());
  for (std::size_t j = 0; j < gain.size(); ++j) {
    gain[j] = ctx_->actions[j].dot(acc);
    size = std::max(size, std::abs(gain[j]));
  }
  if (eta * size > 1.0) {
    std::ostringstream os;
    os << "eta * max|X.M| = " << eta * size << " > 1 (eta=" << eta << ", k=" << params().k
       << ", h=" << meta_day() << ")";
    throw Error(ErrorCode::kOmdPreconditionViolated, os.str());
  }
  if (size == 0.0) return;
  for (std::size_t j = 0; j < gain.size(); ++j) log_w_[j] += eta * gain[j];
  rebuild_policy();
}

Vector pseudo_inverse_estimate(const Policy& p, const Action& played, double reward) {
  Vector out(played.dim(), 0.0);
  if (reward == 0.0) return out;
  const SymMatrix plus = pseudo_inverse(co_occurrence(p));
  const Vector m(played.bits().begin(), played.bits().end());
  out = plus.multiply(m);
  for (double& x : out) x *= reward;
  return out;
}

Exp2Baseline::Exp2Baseline(std::shared_ptr<const LearnerContext> ctx, double gamma, double eta,
                           CounterRng rng)
    : ctx_(std::move(ctx)), gamma_(gamma), eta_(eta), rng_(rng) {
  if (ctx_->actions.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "Exp2Baseline needs an enumerated action set");
  }
  log_w_.assign(ctx_->actions.size(), 0.0);
  rebuild_policy();
}

void Exp2Baseline::rebuild_policy() {
  Policy p(log_weights_to_atoms(ctx_->actions, log_w_));
  policy_ = Policy::mix(p, ctx_->exploration, gamma_);
}

Vector Exp2Baseline::weights() const {
  Vector out;
  for (const auto& a : log_weights_to_atoms(ctx_->actions, log_w_)) out.push_back(a.weight);
  return out;
}

Action Exp2Baseline::play() {
  last_ = policy_.sample(rng_.next_double());
  return *last_;
}

void Exp2Baseline::feedback(double reward) {
  if (!last_) throw Error(ErrorCode::kInvalidArgument, "feedback before play");
  const Vector est = pseudo_inverse_estimate(policy_, *last_, reward);
  last_.reset();
  if (norm_inf(est) == 0.0) return;
  for (std::size_t j = 0; j < log_w_.size(); ++j) log_w_[j] += eta_ * ctx_->actions[j].dot(est);
  rebuild_policy();
}

CombExpReplica::CombExpReplica(const ActionSet& set, std::size_t T, CounterRng rng)
    : set_(set), rng_(rng) {
  const double m = static_cast<double>(set.weight());
  const double d = static_cast<double>(set.dim());
  mu0_ = set.uniform_marginal();
  for (double& x : mu0_) x /= m;
  mu_min_ = std::numeric_limits<double>::infinity();
  for (double x : mu0_) mu_min_ = std::min(mu_min_, m * x);
  const double lambda = min_nonzero_eigenvalue(set.uniform_co_occurrence());
  const double C = lambda / std::pow(m, 1.5);
  const double a = std::sqrt(m * std::log(1.0 / mu_min_));
  const double b = std::sqrt(C * (C * m * m * d + m) * static_cast<double>(T));
  gamma_ = a / (a + b);
  eta_ = gamma_ * C;
  q_ = mu0_;
  rebuild_policy();
}

void CombExpReplica::rebuild_policy() {
  Vector mixed(q_.size());
  for (std::size_t i = 0; i < q_.size(); ++i) mixed[i] = (1.0 - gamma_) * q_[i] + gamma_ * mu0_[i];
  policy_ = decompose(set_, mixed);
}

Action CombExpReplica::play() {
  last_ = policy_.sample(rng_.next_double());
  return *last_;
}

void CombExpReplica::feedback(double reward) {
  if (!last_) throw Error(ErrorCode::kInvalidArgument, "feedback before play");
  const Vector est = pseudo_inverse_estimate(policy_, *last_, reward);
  last_.reset();
  if (norm_inf(est) == 0.0) return;  // zero estimate: q stays put
  Vector raw(q_.size());
  for (std::size_t i = 0; i < q_.size(); ++i) {
    raw[i] = std::max(q_[i] * std::exp(eta_ * est[i]), std::numeric_limits<double>::min());
  }
  q_ = kl_project(set_, raw);
  ++updates_;
  rebuild_policy();
}

}  // namespace swapcomb
