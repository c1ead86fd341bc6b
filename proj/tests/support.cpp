#include "support.hpp"

#include <algorithm>
#include <stdexcept>

namespace testsupport {

using namespace fclloop;
using namespace fclloop::fcl;

namespace {

EntityState villager(const V& v) {
  EntityState e;
  e.id = v.id;
  e.kind = EntityKind::Villager;
  e.role = v.role;
  e.location = v.location;
  e.hp = v.hp;
  return e;
}

EntityState dragon(std::int64_t hp) {
  EntityState e;
  e.id = std::string(kDragonId);
  e.kind = EntityKind::Dragon;
  e.hp = hp;
  return e;
}

template <typename T>
const T& pick(std::mt19937_64& rng, const std::vector<T>& items) {
  return items[std::uniform_int_distribution<std::size_t>(0, items.size() - 1)(rng)];
}

int uniform(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

bool chance(std::mt19937_64& rng, double p) { return std::bernoulli_distribution(p)(rng); }

const std::vector<std::string> kEnsembles = {"Farm", "Attack", "GoToCave", "SpawnFarmer", "SpawnWarrior"};
const std::vector<std::string> kRoleSets = {"Villagers", "Farmers", "Warriors", "Dragons"};

}  // namespace

std::string source_dir() { return FCLLOOP_SOURCE_DIR; }

Trace build_trace(const std::vector<StepSpec>& steps) {
  Trace t;
  t.seed = 0;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    StepRecord r;
    r.index = i;
    for (const auto& v : steps[i].villagers) r.entities.push_back(villager(v));
    r.entities.push_back(dragon(steps[i].dragon_hp));
    r.env.wheat = steps[i].wheat;
    r.env.dragon_hp = steps[i].dragon_hp;
    if (i + 1 < steps.size()) r.assignment = steps[i].assignment;
    t.steps.push_back(std::move(r));
  }
  t.terminated = !steps.empty() && steps.back().dragon_hp <= 0 ? Termination::Win : Termination::LossHorizon;
  return t;
}

Trace uniform_trace(std::size_t len, const std::vector<V>& vs, const std::function<AssignmentMap(std::size_t)>& assign,
                    std::int64_t dragon_hp) {
  std::vector<StepSpec> steps;
  for (std::size_t i = 0; i < len; ++i) steps.push_back({vs, dragon_hp, assign(i), 0});
  return build_trace(steps);
}

Trace random_trace(std::mt19937_64& rng, std::size_t max_len, std::size_t max_entities) {
  const std::size_t len = uniform(rng, 1, static_cast<int>(max_len));
  const std::size_t n_ent = uniform(rng, 1, static_cast<int>(max_entities));
  const bool has_dragon = chance(rng, 0.7);
  const std::size_t n_vill = has_dragon ? n_ent - 1 : n_ent;
  std::vector<std::string> ids;
  for (std::size_t k = 0; k < n_vill; ++k) ids.push_back("v" + std::to_string(k + 1));

  Trace t;
  t.seed = rng();
  for (std::size_t i = 0; i < len; ++i) {
    StepRecord r;
    r.index = i;
    for (const auto& id : ids) {
      if (chance(rng, 0.15)) continue;  // absent at this step
      V v{id, chance(rng, 0.5) ? Role::Farmer : Role::Warrior, chance(rng, 0.6) ? "Village" : "Cave",
          uniform(rng, -1, 5)};
      r.entities.push_back(villager(v));
    }
    if (has_dragon && !chance(rng, 0.1)) r.entities.push_back(dragon(uniform(rng, -2, 6)));
    r.env = {uniform(rng, 0, 12), uniform(rng, -2, 6)};
    std::vector<std::string> pool = ids;
    pool.push_back("ghost");
    for (const auto& e : kEnsembles) {
      if (chance(rng, 0.25)) continue;
      std::set<EntityId> members;
      for (const auto& id : pool) {
        if (chance(rng, 0.3)) members.insert(id);
      }
      r.assignment[e] = members;
    }
    t.steps.push_back(std::move(r));
  }
  return t;
}

namespace {

NumExpr random_count(std::mt19937_64& rng) {
  switch (uniform(rng, 0, 5)) {
    case 0:
      return NumExpr::beg();
    case 1:
      return NumExpr::max();
    default:
      return NumExpr::literal(uniform(rng, 0, 4));
  }
}

NumExpr random_length(std::mt19937_64& rng) {
  switch (uniform(rng, 0, 6)) {
    case 0:
      return NumExpr::max();
    case 1:
      return NumExpr::beg();
    case 2:
      return NumExpr::max().negate();
    case 3:
      return NumExpr::beg().negate();
    default:
      return NumExpr::literal(uniform(rng, -6, 8));
  }
}

NumExpr random_number(std::mt19937_64& rng) {
  switch (uniform(rng, 0, 5)) {
    case 0:
      return NumExpr::beg();
    case 1:
      return NumExpr::max();
    case 2:
      return NumExpr::max().negate();
    default:
      return NumExpr::literal(uniform(rng, -2, 6));
  }
}

CmpOp random_op(std::mt19937_64& rng) { return static_cast<CmpOp>(uniform(rng, 0, 5)); }

std::string random_set(std::mt19937_64& rng) {
  return chance(rng, 0.5) ? pick(rng, kEnsembles) : pick(rng, kRoleSets);
}

Term random_int_term(std::mt19937_64& rng, const std::vector<std::string>& scope) {
  int k = uniform(rng, 0, scope.empty() ? 1 : 2);
  if (k == 0) return random_number(rng);
  if (k == 1) return Cardinality{random_set(rng)};
  return AttrAccess{pick(rng, scope), "hp"};
}

FormulaPtr random_atom(std::mt19937_64& rng, const std::vector<std::string>& scope) {
  int kind = uniform(rng, 0, scope.empty() ? 0 : 2);
  if (kind == 1) return make_member(pick(rng, scope), random_set(rng));
  if (kind == 2) {
    static const std::vector<std::pair<std::string, std::vector<std::string>>> kStringAttrs = {
        {"location", {"Village", "Cave", "village"}},
        {"role", {"Farmer", "Warrior"}},
        {"kind", {"Villager", "Dragon"}}};
    const auto& [attr, values] = pick(rng, kStringAttrs);
    Term lhs = AttrAccess{pick(rng, scope), attr};
    Term rhs = chance(rng, 0.85) ? Term(StringLit{pick(rng, values)}) : Term(AttrAccess{pick(rng, scope), attr});
    if (chance(rng, 0.3)) std::swap(lhs, rhs);
    return make_compare(lhs, chance(rng, 0.5) ? CmpOp::Eq : CmpOp::Ne, rhs);
  }
  return make_compare(random_int_term(rng, scope), random_op(rng), random_int_term(rng, scope));
}

}  // namespace

FormulaPtr random_formula(std::mt19937_64& rng, int max_depth, std::vector<std::string>& scope) {
  if (max_depth <= 1) return random_atom(rng, scope);
  switch (uniform(rng, 0, 7)) {
    case 0:
      return random_atom(rng, scope);
    case 1:
      return make_not(random_formula(rng, max_depth - 1, scope));
    case 2:
    case 3: {
      auto op = static_cast<BinOp>(uniform(rng, 0, 2));
      auto lhs = random_formula(rng, max_depth - 1, scope);
      return make_binary(op, lhs, random_formula(rng, max_depth - 1, scope));
    }
    case 4:
    case 5: {
      NumExpr n = random_count(rng);
      NumExpr t = random_length(rng);
      return make_window(n, t, random_formula(rng, max_depth - 1, scope));
    }
    default: {
      static const std::vector<std::string> kVars = {"v", "w", "x"};
      std::string var = pick(rng, kVars);
      std::string domain = random_set(rng);
      bool shadowed = std::find(scope.begin(), scope.end(), var) != scope.end();
      if (!shadowed) scope.push_back(var);
      auto body = random_formula(rng, max_depth - 1, scope);
      if (!shadowed) scope.pop_back();
      return make_quant(chance(rng, 0.5) ? Quantifier::Forall : Quantifier::Exists, var, domain, body);
    }
  }
}

FormulaPtr random_formula(std::mt19937_64& rng, int max_depth) {
  std::vector<std::string> scope;
  return random_formula(rng, max_depth, scope);
}

// ---- oracle ----

namespace {

using OEnv = std::map<std::string, std::string>;

struct OValue {
  enum { None, Int, Str } tag = None;
  std::int64_t i = 0;
  std::string s;
};

std::int64_t oracle_num(const NumExpr& n, std::int64_t i, std::int64_t len) {
  std::int64_t v = 0;
  if (n.kind == NumExpr::Kind::Literal) v = n.value;
  else if (n.kind == NumExpr::Kind::Beg) v = i;
  else if (n.kind == NumExpr::Kind::Max) v = len - i;
  else throw std::logic_error("INF in oracle");
  return n.negated ? -v : v;
}

const EntityState* present(const Trace& t, std::size_t i, const std::string& id) {
  for (const auto& e : t.steps[i].entities) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

std::set<std::string> members(const Trace& t, std::size_t i, const std::string& set) {
  std::set<std::string> out;
  if (std::find(kEnsembles.begin(), kEnsembles.end(), set) != kEnsembles.end()) {
    auto it = t.steps[i].assignment.find(set);
    if (it != t.steps[i].assignment.end()) out.insert(it->second.begin(), it->second.end());
    return out;
  }
  for (const auto& e : t.steps[i].entities) {
    bool villager = e.kind == EntityKind::Villager;
    if ((set == "Villagers" && villager) || (set == "Farmers" && villager && e.role == Role::Farmer) ||
        (set == "Warriors" && villager && e.role == Role::Warrior) ||
        (set == "Dragons" && e.kind == EntityKind::Dragon)) {
      out.insert(e.id);
    }
  }
  return out;
}

OValue oracle_term(const Trace& t, std::size_t i, const Term& term, const OEnv& env) {
  OValue out;
  if (const auto* n = std::get_if<NumExpr>(&term)) {
    out.tag = OValue::Int;
    out.i = oracle_num(*n, static_cast<std::int64_t>(i), static_cast<std::int64_t>(t.steps.size()));
  } else if (const auto* c = std::get_if<Cardinality>(&term)) {
    out.tag = OValue::Int;
    out.i = static_cast<std::int64_t>(members(t, i, c->set).size());
  } else if (const auto* s = std::get_if<StringLit>(&term)) {
    out.tag = OValue::Str;
    out.s = s->value;
  } else {
    const auto& a = std::get<AttrAccess>(term);
    const EntityState* e = present(t, i, env.at(a.var));
    if (e == nullptr) return out;
    if (a.attr == "hp") {
      out.tag = OValue::Int;
      out.i = e->hp;
    } else if (a.attr == "kind") {
      out.tag = OValue::Str;
      out.s = e->kind == EntityKind::Dragon ? "Dragon" : "Villager";
    } else if (a.attr == "role") {
      if (!e->role) return out;
      out.tag = OValue::Str;
      out.s = *e->role == Role::Farmer ? "Farmer" : "Warrior";
    } else if (a.attr == "location") {
      if (!e->location) return out;
      out.tag = OValue::Str;
      out.s = *e->location;
    }
  }
  return out;
}

template <typename X>
bool apply(CmpOp op, const X& a, const X& b) {
  switch (op) {
    case CmpOp::Lt: return a < b;
    case CmpOp::Le: return !(b < a);
    case CmpOp::Eq: return a == b;
    case CmpOp::Ne: return !(a == b);
    case CmpOp::Ge: return !(a < b);
    case CmpOp::Gt: return b < a;
  }
  return false;
}

}  // namespace

bool oracle_eval(const Trace& t, std::size_t i, const FormulaPtr& f, const OEnv& env) {
  const auto len = static_cast<std::int64_t>(t.steps.size());
  const auto si = static_cast<std::int64_t>(i);
  if (const auto* c = std::get_if<Compare>(&f->node)) {
    OValue a = oracle_term(t, i, c->lhs, env);
    OValue b = oracle_term(t, i, c->rhs, env);
    if (a.tag == OValue::None || b.tag == OValue::None || a.tag != b.tag) return false;
    return a.tag == OValue::Int ? apply(c->op, a.i, b.i) : apply(c->op, a.s, b.s);
  }
  if (const auto* m = std::get_if<Member>(&f->node)) {
    const std::string& id = env.at(m->var);
    return present(t, i, id) != nullptr && members(t, i, m->set).count(id) == 1;
  }
  if (const auto* w = std::get_if<Window>(&f->node)) {
    std::int64_t n = oracle_num(w->n, si, len);
    std::int64_t tt = oracle_num(w->t, si, len);
    std::int64_t from = tt >= 0 ? si : si + tt;
    std::int64_t to = tt >= 0 ? si + tt : si;  // exclusive
    std::int64_t count = 0;
    for (std::int64_t j = from; j < to; ++j) {
      if (j >= 0 && j < len && oracle_eval(t, static_cast<std::size_t>(j), w->body, env)) ++count;
    }
    return count >= n;
  }
  if (const auto* n = std::get_if<Not>(&f->node)) return !oracle_eval(t, i, n->body, env);
  if (const auto* b = std::get_if<Binary>(&f->node)) {
    bool l = oracle_eval(t, i, b->lhs, env);
    bool r = oracle_eval(t, i, b->rhs, env);
    if (b->op == BinOp::And) return l && r;
    if (b->op == BinOp::Or) return l || r;
    return !l || r;
  }
  const auto& q = std::get<Quant>(f->node);
  std::size_t holds = 0;
  auto domain = members(t, i, q.domain);
  for (const auto& id : domain) {
    OEnv inner = env;
    inner[q.var] = id;
    if (oracle_eval(t, i, q.body, inner)) ++holds;
  }
  return q.q == Quantifier::Forall ? holds == domain.size() : holds > 0;
}

AssignmentMap random_assignment(std::mt19937_64& rng, const std::vector<std::string>& alive) {
  AssignmentMap a;
  for (const auto& id : alive) {
    int r = uniform(rng, 0, 19);
    if (r == 0) continue;  // unassigned
    a[pick(rng, kEnsembles)].insert(id);
    if (r == 1) a[pick(rng, kEnsembles)].insert(id);      // maybe duplicated
    if (r == 2) a["Defend"].insert(id);                   // also in an unknown ensemble
  }
  if (chance(rng, 0.1)) a[pick(rng, kEnsembles)].insert("v99");
  if (chance(rng, 0.1)) a["Patrol"];
  if (chance(rng, 0.2)) a[pick(rng, kEnsembles)];
  return a;
}

}  // namespace testsupport
