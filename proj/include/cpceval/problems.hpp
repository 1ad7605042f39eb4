#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace cpceval::problems {

// ax^2 + bx + c with real but irrational roots: the equation is solvable by
// the quadratic formula but never by integer factoring.
struct Quadratic {
  long long a = 0, b = 0, c = 0;
  long long discriminant() const { return b * b - 4 * a * c; }
  std::string render() const;  // "3x^2 - 5x + 1 = 0" style
  bool operator==(const Quadratic&) const = default;
};

bool is_perfect_square(long long x);

// True when the quadratic satisfies the generation invariant: a != 0,
// discriminant >= 0 and not a perfect square.
bool requires_formula(const Quadratic& q);

// Rejection-samples coefficients in [-coeff_bound, coeff_bound].
// Throws after attempt_cap failed draws.
Quadratic gen_quadratic(int coeff_bound, std::mt19937_64& rng, int attempt_cap = 100000);

enum class CardKind { treasure, victory, kingdom };

struct Card {
  std::string name;
  CardKind kind = CardKind::kingdom;
  std::optional<int> dominance_rank;  // within its base chain
  bool operator==(const Card&) const = default;
};

struct CardSet {
  std::vector<Card> cards;  // exactly 6 distinct cards
};

// Base treasure/victory cards plus the standard published First Game kingdom.
// Overridable via load_card_pool.
std::vector<Card> default_card_pool();

// JSON list of {name, kind, dominance_rank?}.
std::vector<Card> load_card_pool(const std::string& path);

// The four strict-dominance pairs (better, worse):
// Gold>Silver, Silver>Copper, Province>Duchy, Duchy>Estate.
std::vector<std::pair<Card, Card>> dominance_pairs(const std::vector<Card>& pool);

// Uniform 6-subset without replacement.
CardSet sample_cardset(const std::vector<Card>& pool, std::mt19937_64& rng);

// Batch sampler that avoids repeating identical sets where the pool permits.
class CardSetSampler {
 public:
  explicit CardSetSampler(std::vector<Card> pool);
  CardSet next(std::mt19937_64& rng);

 private:
  std::vector<Card> pool_;
  std::set<std::vector<std::string>> seen_;
  std::uint64_t distinct_sets_;
};

}  // namespace cpceval::problems
