#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace swapcomb {

using Vector = std::vector<double>;

// A binary action vector M in {0,1}^d. Ordering is lexicographic on the bit
// string, which is also the tie-break order used by every oracle.
class Action {
 public:
  Action() = default;
  explicit Action(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {}
  static Action zeros(std::size_t dim) {
    return Action(std::vector<std::uint8_t>(dim, 0));
  }
  static Action from_string(const std::string& s);

  std::size_t dim() const { return bits_.size(); }
  std::uint8_t operator[](std::size_t i) const { return bits_[i]; }
  void set(std::size_t i, bool on) { bits_[i] = on ? 1 : 0; }
  const std::vector<std::uint8_t>& bits() const { return bits_; }

  std::size_t weight() const;
  std::vector<std::size_t> ones() const;
  double dot(std::span<const double> w) const;
  std::string to_string() const;

  auto operator<=>(const Action&) const = default;
  bool operator==(const Action&) const = default;

 private:
  std::vector<std::uint8_t> bits_;
};

struct Atom {
  Action action;
  double weight = 0.0;
};

// Sparse distribution over actions. Atoms are kept sorted by action with no
// duplicates once normalize() or mix() has been applied.
class Policy {
 public:
  Policy() = default;
  explicit Policy(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {}

  static Policy point_mass(const Action& a) { return Policy({{a, 1.0}}); }
  static Policy uniform(const std::vector<Action>& actions);
  // (1 - gamma) * a + gamma * b, duplicates merged.
  static Policy mix(const Policy& a, const Policy& b, double gamma);
  // Equal-weight average of several policies, duplicates merged.
  static Policy average(std::span<const Policy* const> parts);

  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  bool empty() const { return atoms_.empty(); }
  std::size_t dim() const { return atoms_.empty() ? 0 : atoms_.front().action.dim(); }

  double total_weight() const;
  // Merge duplicate actions, drop zero weights, sort.
  void canonicalize();
  // E_p[R . M]
  double expected_reward(std::span<const double> reward) const;
  // E_p[M], the marginal coordinate vector.
  Vector marginal() const;
  double weight_of(const Action& a) const;
  // Inverse-CDF draw with u in [0,1).
  const Action& sample(double u) const;

  bool operator==(const Policy& other) const;

 private:
  std::vector<Atom> atoms_;
};

}  // namespace swapcomb
