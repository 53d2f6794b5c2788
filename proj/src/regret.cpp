#include "swapcomb/regret.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "swapcomb/error.hpp"
#include "swapcomb/linalg.hpp"

namespace swapcomb {

namespace {

double best_value(const ActionSet& set, std::span<const double> w) { return set.lmo(w).dot(w); }

class IidSequence : public RewardSequence {
 public:
  IidSequence(Vector means, double unit, std::uint64_t seed) : means_(std::move(means)), unit_(unit), rng_(seed) {
    scale_ = unit;
  }
  std::string kind() const override { return "iid_stochastic"; }
  std::size_t dim() const override { return means_.size(); }
  Vector at(std::size_t t) const override {
    CounterRng day = rng_.derive({static_cast<std::uint64_t>(t)});
    Vector r(means_.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = day.next_double() < means_[i] ? unit_ : 0.0;
    return r;
  }

 private:
  Vector means_;
  double unit_;
  CounterRng rng_;
};

class TableSequence : public RewardSequence {
 public:
  TableSequence(std::string kind, std::vector<Vector> rows, std::size_t run, double scale)
      : kind_(std::move(kind)), rows_(std::move(rows)), run_(run) {
    scale_ = scale;
    for (auto& row : rows_) {
      for (double& x : row) x *= scale;
    }
  }
  std::string kind() const override { return kind_; }
  std::size_t dim() const override { return rows_.front().size(); }
  Vector at(std::size_t t) const override { return rows_[((t - 1) / run_) % rows_.size()]; }

 private:
  std::string kind_;
  std::vector<Vector> rows_;
  std::size_t run_;
};

double fit_scale(const ActionSet& set, const std::vector<Vector>& rows) {
  double top = 0.0;
  for (const auto& row : rows) top = std::max(top, best_value(set, row));
  return top > 1.0 ? 1.0 / top : 1.0;
}

void check_rows(const ActionSet& set, const std::vector<Vector>& rows, const char* what) {
  if (rows.empty()) throw Error(ErrorCode::kInvalidArgument, std::string(what) + ": no reward rows");
  for (const auto& row : rows) {
    if (row.size() != set.dim()) {
      throw Error(ErrorCode::kInvalidArgument, std::string(what) + ": reward length does not match d");
    }
    for (double x : row) {
      if (!(x >= 0.0 && x <= 1.0)) {
        throw Error(ErrorCode::kInvalidArgument, std::string(what) + ": rewards must lie in [0,1]");
      }
    }
  }
}

}  // namespace

std::unique_ptr<RewardSequence> iid_stochastic(const ActionSet& set, Vector means, std::uint64_t seed) {
  check_rows(set, {means}, "iid_stochastic");
  return std::make_unique<IidSequence>(std::move(means), 1.0 / static_cast<double>(set.weight()), seed);
}

std::unique_ptr<RewardSequence> piecewise_switching(const ActionSet& set, std::vector<Vector> blocks,
                                                    std::size_t block_length) {
  check_rows(set, blocks, "piecewise_switching");
  if (block_length == 0) throw Error(ErrorCode::kInvalidArgument, "piecewise_switching: block length 0");
  const double s = fit_scale(set, blocks);
  return std::make_unique<TableSequence>("piecewise_switching", std::move(blocks), block_length, s);
}

std::unique_ptr<RewardSequence> shortcut_adversary(const ActionSet& set, std::size_t n) {
  if (set.kind() != DomainKind::kDagPaths) {
    throw Error(ErrorCode::kInvalidArgument, "shortcut adversary needs a DAG path set");
  }
  const Dag raw = build_shortcut_dag(n);
  std::size_t coordinate = 0;
  bool match = false;
  if (const LeveledDag* lev = set.leveled()) {
    const LeveledDag expect = equalize_path_lengths(raw);
    match = lev->dag.num_vertices() == expect.dag.num_vertices() && lev->dag.edges() == expect.dag.edges();
    coordinate = lev->coordinate_of[0];
  } else {
    match = set.dag()->num_vertices() == raw.num_vertices() && set.dag()->edges() == raw.edges();
  }
  if (!match) {
    std::ostringstream os;
    os << "shortcut adversary with n=" << n << " does not match the action set's graph";
    throw Error(ErrorCode::kInvalidArgument, os.str());
  }
  Vector row(set.dim(), 0.0);
  row[coordinate] = 1.0;
  return std::make_unique<TableSequence>("shortcut_adversary", std::vector<Vector>{row}, 1, 1.0);
}

std::unique_ptr<RewardSequence> custom_file(const ActionSet& set, std::istream& in) {
  std::vector<Vector> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    Vector row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || cell.find_first_not_of(" \t\r", used) != std::string::npos) {
        std::ostringstream os;
        os << "reward file line " << lineno << ": bad value '" << cell << "'";
        throw Error(ErrorCode::kConfig, os.str());
      }
      if (!(v >= 0.0 && v <= 1.0)) {
        std::ostringstream os;
        os << "reward file line " << lineno << ": value " << v << " outside [0,1]";
        throw Error(ErrorCode::kConfig, os.str());
      }
      row.push_back(v);
    }
    if (row.size() != set.dim()) {
      std::ostringstream os;
      os << "reward file line " << lineno << ": expected " << set.dim() << " columns, got " << row.size();
      throw Error(ErrorCode::kConfig, os.str());
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorCode::kConfig, "reward file has no rows");
  const double s = fit_scale(set, rows);
  return std::make_unique<TableSequence>("custom_file", std::move(rows), 1, s);
}

std::size_t Ledger::intern(const Action& a) {
  auto [it, fresh] = ids_.try_emplace(a, actions_.size());
  if (fresh) actions_.push_back(a);
  return it->second;
}

void Ledger::record(const Policy& p, const Action& sampled, Vector reward, double realized) {
  Day day;
  day.policy.reserve(p.size());
  for (const auto& at : p.atoms()) day.policy.emplace_back(intern(at.action), at.weight);
  day.sampled = intern(sampled);
  day.reward = std::move(reward);
  day.realized = realized;
  days_.push_back(std::move(day));
}

double external_regret(const Ledger& ledger, const ActionSet& set, std::size_t prefix) {
  const std::size_t n = std::min(prefix, ledger.size());
  Vector total(set.dim(), 0.0);
  double expected = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const auto& day = ledger.days()[t];
    for (std::size_t i = 0; i < total.size(); ++i) total[i] += day.reward[i];
    for (const auto& [id, w] : day.policy) expected += w * ledger.action(id).dot(day.reward);
  }
  return best_value(set, total) - expected;
}

double swap_regret(const Ledger& ledger, const ActionSet& set, std::size_t prefix) {
  const std::size_t n = std::min(prefix, ledger.size());
  std::vector<Vector> gain(ledger.num_actions());
  for (std::size_t t = 0; t < n; ++t) {
    const auto& day = ledger.days()[t];
    for (const auto& [id, w] : day.policy) {
      Vector& g = gain[id];
      if (g.empty()) g.assign(set.dim(), 0.0);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += w * day.reward[i];
    }
  }
  double total = 0.0;
  for (std::size_t id = 0; id < gain.size(); ++id) {
    if (gain[id].empty()) continue;
    total += best_value(set, gain[id]) - ledger.action(id).dot(gain[id]);
  }
  return total;
}

double realized_reward(const Ledger& ledger, std::size_t prefix) {
  const std::size_t n = std::min(prefix, ledger.size());
  double total = 0.0;
  for (std::size_t t = 0; t < n; ++t) total += ledger.days()[t].realized;
  return total;
}

double brute_force_swap_regret(const Ledger& ledger, const std::vector<Action>& actions) {
  if (actions.empty()) throw Error(ErrorCode::kInvalidArgument, "brute force needs actions");
  std::vector<std::size_t> support;
  for (const auto& day : ledger.days()) {
    for (const auto& [id, w] : day.policy) {
      if (std::find(support.begin(), support.end(), id) == support.end()) support.push_back(id);
    }
  }
  // value[s][j] = sum_t p_t(s) R_t . (actions[j] - s)
  std::vector<Vector> value(support.size(), Vector(actions.size(), 0.0));
  for (const auto& day : ledger.days()) {
    for (const auto& [id, w] : day.policy) {
      const std::size_t s = std::find(support.begin(), support.end(), id) - support.begin();
      const double own = ledger.action(id).dot(day.reward);
      for (std::size_t j = 0; j < actions.size(); ++j) value[s][j] += w * (actions[j].dot(day.reward) - own);
    }
  }
  double best = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> phi(support.size(), 0);
  while (true) {
    double v = 0.0;
    for (std::size_t s = 0; s < support.size(); ++s) v += value[s][phi[s]];
    best = std::max(best, v);
    std::size_t pos = 0;
    while (pos < phi.size() && ++phi[pos] == actions.size()) phi[pos++] = 0;
    if (pos == phi.size()) break;
  }
  return support.empty() ? 0.0 : best;
}

RegretTracker::RegretTracker(const ActionSet& set) : set_(set), total_(set.dim(), 0.0) {}

void RegretTracker::add(const Policy& p, std::span<const double> reward, double realized) {
  ++days_;
  realized_ += realized;
  for (std::size_t i = 0; i < total_.size(); ++i) total_[i] += reward[i];
  for (const auto& at : p.atoms()) {
    expected_ += at.weight * at.action.dot(reward);
    auto [it, fresh] = gain_.try_emplace(at.action, Vector());
    if (fresh) it->second.assign(total_.size(), 0.0);
    for (std::size_t i = 0; i < total_.size(); ++i) it->second[i] += at.weight * reward[i];
  }
}

double RegretTracker::external() const { return best_value(set_, total_) - expected_; }

double RegretTracker::swap() const {
  double total = 0.0;
  for (const auto& [a, g] : gain_) total += best_value(set_, g) - a.dot(g);
  return total;
}

DayOutcome play_day(BanditAlgorithm& alg, const RewardSequence& adversary, std::size_t t,
                    const std::function<void()>& before_feedback) {
  DayOutcome out;
  out.policy = alg.policy();
  out.sampled = alg.play();
  out.reward = adversary.at(t);
  out.realized = out.sampled.dot(out.reward);
  if (before_feedback) before_feedback();
  alg.feedback(out.realized);
  return out;
}

Ledger run_horizon(BanditAlgorithm& alg, const RewardSequence& adversary, std::size_t T) {
  Ledger ledger;
  for (std::size_t t = 1; t <= T; ++t) {
    DayOutcome day = play_day(alg, adversary, t);
    ledger.record(day.policy, day.sampled, std::move(day.reward), day.realized);
  }
  return ledger;
}

void DecompositionRecorder::observe(const Master& master, std::span<const double> reward) {
  const std::size_t t = master.day();
  for (std::size_t k = 1; k <= K_; ++k) {
    const auto key = std::make_pair(k, master.interval(k));
    auto [it, fresh] = index_.try_emplace(key, intervals_.size());
    if (fresh) {
      IntervalAudit rec;
      rec.k = k;
      rec.l = key.second;
      rec.first_day = t;
      rec.reward_sum.assign(reward.size(), 0.0);
      intervals_.push_back(std::move(rec));
    }
    IntervalAudit& rec = intervals_[it->second];
    rec.last_day = t;
    for (std::size_t i = 0; i < reward.size(); ++i) rec.reward_sum[i] += reward[i];
    rec.learner_reward += master.scale(k).policy().expected_reward(reward);
  }
}

AuditReport decomposition_audit(const Ledger& ledger, const ActionSet& set, const DecompositionRecorder& rec) {
  AuditReport out;
  out.T = ledger.size();
  out.K = rec.K();
  out.swap = swap_regret(ledger, set);
  out.external = external_regret(ledger, set);
  out.intervals = rec.intervals();
  for (auto& iv : out.intervals) {
    iv.regret = best_value(set, iv.reward_sum) - iv.learner_reward;
    out.interval_regret_sum_all += iv.regret;
    if (iv.k < out.K) out.interval_regret_sum += iv.regret;
  }
  const double K = static_cast<double>(out.K);
  out.rhs = out.interval_regret_sum / K + static_cast<double>(out.T) / K;
  out.slack = out.rhs - out.swap;
  out.holds = out.swap <= out.rhs + 1e-6;
  return out;
}

}  // namespace swapcomb
