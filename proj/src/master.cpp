#include "swapcomb/master.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

#include "swapcomb/error.hpp"

namespace swapcomb {

std::size_t theory_scale_count(std::size_t T, std::size_t H) {
  if (H < 2) throw Error(ErrorCode::kInvalidArgument, "H must be at least 2");
  std::size_t K = 0;
  std::size_t power = 1;
  while (power < T) {
    power = saturating_pow(H, ++K);
  }
  return std::max<std::size_t>(1, K);
}

std::size_t practical_base(std::size_t T) {
  auto H = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(T))));
  while (H > 1 && (H - 1) * (H - 1) >= T) --H;
  while (H * H < T) ++H;
  return std::max<std::size_t>(2, H);
}

std::size_t practical_scale_count(std::size_t T, std::size_t H) {
  if (H < 2) throw Error(ErrorCode::kInvalidArgument, "H must be at least 2");
  std::size_t K = 0;
  while (saturating_pow(H, K + 1) <= T) ++K;
  return std::max<std::size_t>(2, K);
}

Master::Master(const ActionSet& set, std::size_t H, std::size_t K, std::size_t T, LearnerFactory factory,
               CounterRng rng)
    : set_(set), H_(H), K_(K), T_(T), factory_(std::move(factory)), rng_(rng), slots_(K) {
  if (H < 2) throw Error(ErrorCode::kInvalidArgument, "H must be at least 2");
  if (K < 1) throw Error(ErrorCode::kInvalidArgument, "K must be at least 1");
  if (!factory_) throw Error(ErrorCode::kInvalidArgument, "missing learner factory");
  broadcast_.assign(set.dim(), 0.0);
  if (T_ >= 1) start_day();
}

void Master::start_day() {
  for (std::size_t k = 1; k <= K_; ++k) {
    const std::size_t span = saturating_pow(H_, k);
    if ((t_ - 1) % span != 0) continue;
    Slot& slot = slots_[k - 1];
    slot.l = (t_ - 1) / span + 1;
    slot.learner = factory_(k, slot.l, truncated_meta_days(T_, H_, k, slot.l));
    if (!slot.learner) throw Error(ErrorCode::kInvalidArgument, "learner factory returned null");
    slot.generation = next_generation_++;
    restarts_.push_back({t_, k, slot.l});
  }
}

void Master::refresh_mixture() {
  if (t_ > T_) throw Error(ErrorCode::kInvalidArgument, "horizon exhausted");
  std::vector<std::pair<std::uint64_t, std::uint64_t>> key;
  key.reserve(K_);
  for (const auto& s : slots_) key.emplace_back(s.generation, s.learner->policy_version());
  if (key == mixture_key_) return;
  std::vector<const Policy*> parts;
  for (const auto& s : slots_) parts.push_back(&s.learner->policy());
  mixture_ = Policy::average(parts);
  mixture_key_ = std::move(key);
}

const Policy& Master::policy() {
  refresh_mixture();
  return mixture_;
}

Action Master::play() {
  refresh_mixture();
  // One uniform draw picks the scale; its fractional remainder drives the
  // inverse-CDF draw inside that scale's policy.
  const double u = rng_.next_double() * static_cast<double>(K_);
  const std::size_t s = std::min(K_ - 1, static_cast<std::size_t>(u));
  const double frac = std::min(u - static_cast<double>(s), std::nextafter(1.0, 0.0));
  sampled_scale_ = s + 1;
  last_ = slots_[s].learner->policy().sample(frac);
  return *last_;
}

void Master::feedback(double reward) {
  if (!last_) throw Error(ErrorCode::kInvalidArgument, "feedback before play");
  if (reward == 0.0) {
    std::fill(broadcast_.begin(), broadcast_.end(), 0.0);
  } else {
    // Restarted learners usually come back with the same initial policy, so
    // a stale key is confirmed against the cached mixture before rebuilding.
    if (!sigma_plus_ || (pinv_key_ != mixture_key_ && !(pinv_mixture_ == mixture_))) {
      sigma_plus_ = pseudo_inverse(co_occurrence(mixture_));
      pinv_mixture_ = mixture_;
      ++pinv_builds_;
    }
    pinv_key_ = mixture_key_;
    const Vector m(last_->bits().begin(), last_->bits().end());
    broadcast_ = sigma_plus_->multiply(m);
    for (double& x : broadcast_) x *= reward;
  }
  last_.reset();

  for (std::size_t k = 1; k <= K_; ++k) {
    Slot& slot = slots_[k - 1];
    try {
      slot.learner->ingest(broadcast_);
    } catch (const Error& e) {
      const std::string what = e.what();
      const std::size_t prefix = std::strlen(to_string(e.code())) + 2;
      std::ostringstream os;
      os << (what.size() > prefix ? what.substr(prefix) : what) << " [t=" << t_ << ", k=" << k
         << ", l=" << slot.l << ", h=" << slot.learner->meta_day() << "]";
      throw Error(e.code(), os.str());
    }
  }
  ++t_;
  if (t_ <= T_) start_day();
}

DoublingWrapper::DoublingWrapper(Factory factory) : factory_(std::move(factory)) {
  if (!factory_) throw Error(ErrorCode::kInvalidArgument, "missing epoch factory");
}

void DoublingWrapper::ensure_epoch() {
  if (current_ && used_in_epoch_ < saturating_pow(2, epoch_)) return;
  if (current_) ++epoch_;
  const std::size_t length = saturating_pow(2, epoch_);
  current_ = factory_(epoch_, length);
  if (!current_) throw Error(ErrorCode::kInvalidArgument, "epoch factory returned null");
  used_in_epoch_ = 0;
  ends_.push_back(t_ - 1 + length);
}

const Policy& DoublingWrapper::policy() {
  ensure_epoch();
  return current_->policy();
}

Action DoublingWrapper::play() {
  ensure_epoch();
  return current_->play();
}

void DoublingWrapper::feedback(double reward) {
  if (!current_) throw Error(ErrorCode::kInvalidArgument, "feedback before play");
  current_->feedback(reward);
  ++used_in_epoch_;
  ++t_;
}

}  // namespace swapcomb
