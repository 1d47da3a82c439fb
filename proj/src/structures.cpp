#include "tcprobe/structures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>

#include "tcprobe/prepresolve.hpp"

namespace tcprobe {

CouplingMatrix::CouplingMatrix(std::vector<Cell> cells)
    : cells_(std::move(cells)) {
  for (Cell& c : cells_)
    if (c.i > c.j) std::swap(c.i, c.j);
  std::sort(cells_.begin(), cells_.end(), [](const Cell& a, const Cell& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
}

int CouplingMatrix::at(int i, int j) const {
  if (i == j) return 0;
  if (i > j) std::swap(i, j);
  auto it = std::lower_bound(cells_.begin(), cells_.end(), std::pair{i, j},
                             [](const Cell& c, const std::pair<int, int>& key) {
                               return c.i != key.first ? c.i < key.first
                                                       : c.j < key.second;
                             });
  if (it != cells_.end() && it->i == i && it->j == j) return it->count;
  return 0;
}

int CliqueTable::add_clique(Clique clique) {
  const int id = static_cast<int>(cliques_.size());
  for (const Literal& l : clique.literals)
    members_[l.var].push_back({id, l.polarity});
  cliques_.push_back(std::move(clique));
  return id;
}

bool CliqueTable::contains_pair(Literal a, Literal b) const {
  auto ma = memberships(a.var);
  auto mb = memberships(b.var);
  // Both lists are in ascending clique id order.
  std::size_t p = 0, q = 0;
  while (p < ma.size() && q < mb.size()) {
    if (ma[p].clique < mb[q].clique) {
      ++p;
    } else if (mb[q].clique < ma[p].clique) {
      ++q;
    } else {
      // A variable can appear twice in one clique only with both polarities,
      // which never happens for rows or probing conflicts.
      if (ma[p].polarity == a.polarity && mb[q].polarity == b.polarity)
        return true;
      ++p;
      ++q;
    }
  }
  return false;
}

bool CliqueTable::shares_clique(int i, int j) const {
  auto mi = memberships(i);
  auto mj = memberships(j);
  std::size_t p = 0, q = 0;
  while (p < mi.size() && q < mj.size()) {
    if (mi[p].clique < mj[q].clique)
      ++p;
    else if (mj[q].clique < mi[p].clique)
      ++q;
    else
      return true;
  }
  return false;
}

int conflict_number(int j, const CliqueTable& cliques) {
  int conf = 0;
  for (const auto& m : cliques.memberships(j))
    conf += cliques.clique(m.clique).row_nnz;
  return conf;
}

std::vector<int> conflict_numbers(const CliqueTable& cliques) {
  std::vector<int> conf(cliques.num_cols());
  for (int j = 0; j < cliques.num_cols(); ++j)
    conf[j] = conflict_number(j, cliques);
  return conf;
}

CmCt build_cm_ct(const PresolveOutput& presolved, long long size_limit,
                 long long work_limit) {
  const MipInstance& inst = presolved.instance;
  const int n = inst.num_cols();
  std::vector<bool> binary(n, false);
  for (int j : presolved.binaries) binary[j] = true;

  CmCt out;
  std::unordered_map<std::uint64_t, int> counts;
  std::vector<int> bins;
  long long insertions = 0;
  for (int row : presolved.non_clique_rows) {
    if (inst.row_nnz(row) > size_limit) continue;
    bins.clear();
    for (int j : inst.row(row).indices)
      if (binary[j]) bins.push_back(j);
    const long long len = static_cast<long long>(bins.size());
    const long long pairs = len * (len - 1) / 2;
    if (insertions + pairs > work_limit) {
      out.coupling.truncated = true;
      break;
    }
    insertions += pairs;
    for (std::size_t a = 0; a < bins.size(); ++a)
      for (std::size_t b = a + 1; b < bins.size(); ++b) {
        const std::uint64_t key =
            (static_cast<std::uint64_t>(bins[a]) << 32) |
            static_cast<std::uint32_t>(bins[b]);
        ++counts[key];
      }
  }

  std::vector<CouplingMatrix::Cell> cells;
  cells.reserve(counts.size());
  for (const auto& [key, count] : counts)
    cells.push_back({static_cast<int>(key >> 32),
                     static_cast<int>(key & 0xffffffffu), count});
  const bool truncated = out.coupling.truncated;
  out.coupling = CouplingMatrix(std::move(cells));
  out.coupling.truncated = truncated;
  out.coupling.pair_insertions = insertions;

  out.cliques = CliqueTable(n);
  for (std::size_t c = 0; c < presolved.cliques.size(); ++c) {
    Clique clique;
    clique.source_row = presolved.clique_rows[c];
    clique.row_nnz = inst.row_nnz(clique.source_row);
    for (const auto& [lit, coef] : presolved.cliques[c].literals)
      clique.literals.push_back(lit);
    out.cliques.add_clique(std::move(clique));
  }
  return out;
}

ImplicationStore::ImplicationStore(int num_cols)
    : af_(num_cols),
      dependents_(num_cols),
      af_order_(num_cols, -1),
      singles_(2 * static_cast<std::size_t>(num_cols)),
      pair_partners_(2 * static_cast<std::size_t>(num_cols)) {}

void ImplicationStore::attach(int var, int root, double scale,
                              double offset) {
  af_[var] = Aggregation{var, root, scale, offset};
  af_order_[var] = af_counter_++;
  ++num_aggregations_;
  dependents_[root].push_back(var);
  for (int k : dependents_[var]) {
    Aggregation& dep = *af_[k];
    dep.offset = dep.scale * offset + dep.offset;
    dep.scale = dep.scale * scale;
    dep.partner = root;
    dependents_[root].push_back(k);
  }
  dependents_[var].clear();
}

AggregationResult ImplicationStore::add_aggregation(int var, int partner,
                                                    double scale,
                                                    double offset,
                                                    double tol) {
  using Kind = AggregationResult::Kind;
  double a = scale;
  double b = offset;
  int root = partner;
  if (af_[root]) {
    const Aggregation& p = *af_[root];
    b = a * p.offset + b;
    a = a * p.scale;
    root = p.partner;
  }

  if (std::abs(a) <= tol) return {Kind::kContradiction, std::pair{var, b}};

  if (root == var) {
    if (std::abs(a - 1.0) <= tol) {
      if (std::abs(b) <= tol) return {Kind::kDuplicate, std::nullopt};
      return {Kind::kContradiction, std::nullopt};
    }
    return {Kind::kContradiction, std::pair{var, b / (1.0 - a)}};
  }

  if (af_[var]) {
    const Aggregation existing = *af_[var];
    if (existing.partner == root) {
      const bool same_scale = std::abs(a - existing.scale) <= tol;
      if (same_scale && std::abs(b - existing.offset) <= tol)
        return {Kind::kDuplicate, std::nullopt};
      if (same_scale) return {Kind::kContradiction, std::nullopt};
      return {Kind::kContradiction,
              std::pair{root, (existing.offset - b) / (a - existing.scale)}};
    }
    // a x_root + b = s x_other + o  =>  x_other = (a x_root + b - o) / s
    return add_aggregation(existing.partner, root, a / existing.scale,
                           (b - existing.offset) / existing.scale, tol);
  }

  attach(var, root, a, b);
  return {Kind::kAdded, std::nullopt};
}

std::vector<Aggregation> ImplicationStore::aggregations() const {
  std::vector<Aggregation> out;
  for (const auto& a : af_)
    if (a) out.push_back(*a);
  std::sort(out.begin(), out.end(),
            [this](const Aggregation& x, const Aggregation& y) {
              return af_order_[x.var] < af_order_[y.var];
            });
  return out;
}

void ImplicationStore::remove_aggregation(int var) {
  if (!af_[var]) return;
  std::erase(dependents_[af_[var]->partner], var);
  af_[var].reset();
  --num_aggregations_;
}

bool ImplicationStore::tighter(BoundKind kind, double candidate,
                               double existing) {
  return kind == BoundKind::kLower ? candidate > existing
                                   : candidate < existing;
}

bool ImplicationStore::add_single(Literal premise, Implication implication) {
  const std::size_t s = slot(premise);
  BoundMap& map = singles_[s];
  const TargetKey key{implication.target, implication.kind};
  auto [it, inserted] = map.try_emplace(key, implication.bound);
  if (!inserted) {
    if (!tighter(implication.kind, implication.bound, it->second)) return false;
    it->second = implication.bound;
  }
  // Pair entries on this literal that the new single entry dominates.
  for (std::size_t other : pair_partners_[s]) {
    BoundMap& pair_map =
        pairs_.find(s < other ? std::pair{s, other} : std::pair{other, s})
            ->second;
    auto p = pair_map.find(key);
    if (p != pair_map.end() &&
        !tighter(implication.kind, p->second, implication.bound))
      pair_map.erase(p);
  }
  return true;
}

bool ImplicationStore::single_dominates(Literal premise,
                                        const Implication& implication) const {
  const BoundMap& map = singles_[slot(premise)];
  auto it = map.find(TargetKey{implication.target, implication.kind});
  if (it == map.end()) return false;
  return !tighter(implication.kind, implication.bound, it->second);
}

bool ImplicationStore::add_pair(Literal a, Literal b,
                                Implication implication) {
  if (single_dominates(a, implication) || single_dominates(b, implication))
    return false;
  std::size_t sa = slot(a), sb = slot(b);
  if (sa > sb) std::swap(sa, sb);
  auto [pit, fresh] = pairs_.try_emplace({sa, sb});
  if (fresh) {
    pair_partners_[sa].push_back(sb);
    pair_partners_[sb].push_back(sa);
  }
  BoundMap& map = pit->second;
  const TargetKey key{implication.target, implication.kind};
  auto [it, inserted] = map.try_emplace(key, implication.bound);
  if (inserted) return true;
  if (tighter(implication.kind, implication.bound, it->second)) {
    it->second = implication.bound;
    return true;
  }
  return false;
}

std::vector<Implication> ImplicationStore::singles(Literal premise) const {
  std::vector<Implication> out;
  for_each_single(premise, [&](const Implication& imp) { out.push_back(imp); });
  return out;
}

std::size_t ImplicationStore::num_singles() const {
  std::size_t n = 0;
  for (const auto& m : singles_) n += m.size();
  return n;
}

std::size_t ImplicationStore::num_pairs() const {
  std::size_t n = 0;
  for (const auto& [key, m] : pairs_) n += m.size();
  return n;
}

std::vector<std::pair<Literal, Implication>> ImplicationStore::all_singles()
    const {
  std::vector<std::pair<Literal, Implication>> out;
  for (std::size_t s = 0; s < singles_.size(); ++s)
    for (const auto& [key, bound] : singles_[s])
      out.push_back({literal_of(s), Implication{key.first, key.second, bound}});
  return out;
}

std::vector<std::pair<LiteralPair, Implication>> ImplicationStore::all_pairs()
    const {
  std::vector<std::pair<LiteralPair, Implication>> out;
  for (const auto& [key, map] : pairs_)
    for (const auto& [tk, bound] : map)
      out.push_back({{literal_of(key.first), literal_of(key.second)},
                     Implication{tk.first, tk.second, bound}});
  return out;
}

}  // namespace tcprobe
