#include "swapcomb/action.hpp"

#include <algorithm>
#include <map>

#include "swapcomb/error.hpp"

namespace swapcomb {

Action Action::from_string(const std::string& s) {
  std::vector<std::uint8_t> bits;
  bits.reserve(s.size());
  for (char c : s) {
    if (c != '0' && c != '1') {
      throw Error(ErrorCode::kInvalidArgument, "bad action string '" + s + "'");
    }
    bits.push_back(c == '1' ? 1 : 0);
  }
  return Action(std::move(bits));
}

std::size_t Action::weight() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

std::vector<std::size_t> Action::ones() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i]) out.push_back(i);
  }
  return out;
}

double Action::dot(std::span<const double> w) const {
  double s = 0.0;
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i]) s += w[i];
  }
  return s;
}

std::string Action::to_string() const {
  std::string s;
  s.reserve(bits_.size());
  for (auto b : bits_) s.push_back(b ? '1' : '0');
  return s;
}

Policy Policy::uniform(const std::vector<Action>& actions) {
  if (actions.empty()) {
    throw Error(ErrorCode::kEmptySupport, "uniform policy over no actions");
  }
  std::vector<Atom> atoms;
  atoms.reserve(actions.size());
  const double w = 1.0 / static_cast<double>(actions.size());
  for (const auto& a : actions) atoms.push_back({a, w});
  Policy p(std::move(atoms));
  p.canonicalize();
  return p;
}

Policy Policy::mix(const Policy& a, const Policy& b, double gamma) {
  std::map<Action, double> acc;
  if (gamma < 1.0) {
    for (const auto& atom : a.atoms_) acc[atom.action] += (1.0 - gamma) * atom.weight;
  }
  if (gamma > 0.0) {
    for (const auto& atom : b.atoms_) acc[atom.action] += gamma * atom.weight;
  }
  std::vector<Atom> atoms;
  atoms.reserve(acc.size());
  for (auto& [action, w] : acc) {
    if (w > 0.0) atoms.push_back({action, w});
  }
  return Policy(std::move(atoms));
}

Policy Policy::average(std::span<const Policy* const> parts) {
  std::map<Action, double> acc;
  const double share = 1.0 / static_cast<double>(parts.size());
  for (const Policy* p : parts) {
    for (const auto& atom : p->atoms_) acc[atom.action] += share * atom.weight;
  }
  std::vector<Atom> atoms;
  atoms.reserve(acc.size());
  for (auto& [action, w] : acc) {
    if (w > 0.0) atoms.push_back({action, w});
  }
  return Policy(std::move(atoms));
}

double Policy::total_weight() const {
  double s = 0.0;
  for (const auto& atom : atoms_) s += atom.weight;
  return s;
}

void Policy::canonicalize() {
  std::map<Action, double> acc;
  for (auto& atom : atoms_) acc[atom.action] += atom.weight;
  atoms_.clear();
  for (auto& [action, w] : acc) {
    if (w > 0.0) atoms_.push_back({action, w});
  }
}

double Policy::expected_reward(std::span<const double> reward) const {
  double s = 0.0;
  for (const auto& atom : atoms_) s += atom.weight * atom.action.dot(reward);
  return s;
}

Vector Policy::marginal() const {
  Vector m(dim(), 0.0);
  for (const auto& atom : atoms_) {
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (atom.action[i]) m[i] += atom.weight;
    }
  }
  return m;
}

double Policy::weight_of(const Action& a) const {
  for (const auto& atom : atoms_) {
    if (atom.action == a) return atom.weight;
  }
  return 0.0;
}

const Action& Policy::sample(double u) const {
  if (atoms_.empty()) throw Error(ErrorCode::kEmptySupport, "sampling an empty policy");
  const double target = u * total_weight();
  double c = 0.0;
  for (const auto& atom : atoms_) {
    c += atom.weight;
    if (target < c) return atom.action;
  }
  return atoms_.back().action;
}

bool Policy::operator==(const Policy& other) const {
  if (atoms_.size() != other.atoms_.size()) return false;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (atoms_[i].action != other.atoms_[i].action) return false;
    if (atoms_[i].weight != other.atoms_[i].weight) return false;
  }
  return true;
}

}  // namespace swapcomb
