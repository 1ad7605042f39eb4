#include "cpceval/problems.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace cpceval::problems {

std::string Quadratic::render() const {
  std::ostringstream os;
  auto term = [&](long long k, const char* var, bool lead) {
    if (k == 0) return;
    if (lead) {
      if (k == -1 && *var) os << "-";
      else if (k != 1 || !*var) os << k;
    } else {
      os << (k < 0 ? " - " : " + ");
      long long m = std::llabs(k);
      if (m != 1 || !*var) os << m;
    }
    os << var;
  };
  term(a, "x^2", true);
  term(b, "x", false);
  term(c, "", false);
  os << " = 0";
  return os.str();
}

bool is_perfect_square(long long x) {
  if (x < 0) return false;
  long long r = static_cast<long long>(std::llround(std::sqrt(static_cast<double>(x))));
  for (long long d = std::max(0ll, r - 2); d <= r + 2; ++d) {
    if (d * d == x) return true;
  }
  return false;
}

bool requires_formula(const Quadratic& q) {
  if (q.a == 0) return false;
  long long disc = q.discriminant();
  return disc >= 0 && !is_perfect_square(disc);
}

Quadratic gen_quadratic(int coeff_bound, std::mt19937_64& rng, int attempt_cap) {
  if (coeff_bound < 1) throw std::invalid_argument("coeff_bound must be >= 1");
  std::uniform_int_distribution<long long> coeff(-coeff_bound, coeff_bound);
  for (int attempt = 0; attempt < attempt_cap; ++attempt) {
    Quadratic q{coeff(rng), coeff(rng), coeff(rng)};
    if (requires_formula(q)) return q;
  }
  throw std::runtime_error("gen_quadratic: attempt cap exhausted (coeff_bound too small?)");
}

namespace {

CardKind parse_kind(const std::string& s) {
  if (s == "treasure") return CardKind::treasure;
  if (s == "victory") return CardKind::victory;
  if (s == "kingdom") return CardKind::kingdom;
  throw std::runtime_error("unknown card kind: " + s);
}

}  // namespace

std::vector<Card> default_card_pool() {
  std::vector<Card> pool = {
      {"Copper", CardKind::treasure, 0},
      {"Silver", CardKind::treasure, 1},
      {"Gold", CardKind::treasure, 2},
      {"Estate", CardKind::victory, 0},
      {"Duchy", CardKind::victory, 1},
      {"Province", CardKind::victory, 2},
      {"Cellar", CardKind::kingdom, std::nullopt},
      {"Market", CardKind::kingdom, std::nullopt},
      {"Merchant", CardKind::kingdom, std::nullopt},
      {"Militia", CardKind::kingdom, std::nullopt},
      {"Mine", CardKind::kingdom, std::nullopt},
      {"Moat", CardKind::kingdom, std::nullopt},
      {"Remodel", CardKind::kingdom, std::nullopt},
      {"Smithy", CardKind::kingdom, std::nullopt},
      {"Village", CardKind::kingdom, std::nullopt},
      {"Workshop", CardKind::kingdom, std::nullopt},
  };
  return pool;
}

std::vector<Card> load_card_pool(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open card pool file: " + path);
  nlohmann::json j;
  in >> j;
  std::vector<Card> pool;
  std::set<std::string> names;
  for (const auto& item : j) {
    Card card;
    card.name = item.at("name").get<std::string>();
    card.kind = parse_kind(item.at("kind").get<std::string>());
    if (item.contains("dominance_rank") && !item.at("dominance_rank").is_null())
      card.dominance_rank = item.at("dominance_rank").get<int>();
    if (!names.insert(card.name).second)
      throw std::runtime_error("duplicate card name in pool: " + card.name);
    pool.push_back(std::move(card));
  }
  return pool;
}

std::vector<std::pair<Card, Card>> dominance_pairs(const std::vector<Card>& pool) {
  auto find = [&](const std::string& name) -> const Card& {
    auto it = std::find_if(pool.begin(), pool.end(),
                           [&](const Card& c) { return c.name == name; });
    if (it == pool.end())
      throw std::runtime_error("dominance_pairs: base card missing from pool: " + name);
    return *it;
  };
  return {
      {find("Gold"), find("Silver")},
      {find("Silver"), find("Copper")},
      {find("Province"), find("Duchy")},
      {find("Duchy"), find("Estate")},
  };
}

CardSet sample_cardset(const std::vector<Card>& pool, std::mt19937_64& rng) {
  if (pool.size() < 6) throw std::invalid_argument("card pool smaller than 6");
  std::vector<Card> shuffled = pool;
  // Partial Fisher-Yates: only the first 6 positions are needed.
  for (std::size_t i = 0; i < 6; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, shuffled.size() - 1);
    std::swap(shuffled[i], shuffled[pick(rng)]);
  }
  shuffled.resize(6);
  return CardSet{std::move(shuffled)};
}

namespace {

std::uint64_t binom(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

CardSetSampler::CardSetSampler(std::vector<Card> pool)
    : pool_(std::move(pool)), distinct_sets_(binom(pool_.size(), 6)) {}

CardSet CardSetSampler::next(std::mt19937_64& rng) {
  for (;;) {
    CardSet set = sample_cardset(pool_, rng);
    std::vector<std::string> key;
    for (const auto& c : set.cards) key.push_back(c.name);
    std::sort(key.begin(), key.end());
    if (seen_.size() >= distinct_sets_) return set;  // pool exhausted, repeats allowed
    if (seen_.insert(std::move(key)).second) return set;
  }
}

}  // namespace cpceval::problems
