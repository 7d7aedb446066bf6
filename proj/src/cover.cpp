#include "qcsg/cover.hpp"

#include <algorithm>
#include <limits>
#include <map>

#include "qcsg/error.hpp"

namespace qcsg {

namespace {

bool contains(const std::vector<std::size_t>& sorted, std::size_t x) {
  return std::binary_search(sorted.begin(), sorted.end(), x);
}

// Dancing-links matrix: one column per universe element, one row per non-empty subset.
class DancingLinks {
 public:
  explicit DancingLinks(const CoverInstance& instance) : instance_(instance) {
    const std::size_t columns = instance.universe.size();
    // Node 0 is the root; nodes 1..columns are column headers.
    const std::size_t header_count = columns + 1;
    left_.resize(header_count);
    right_.resize(header_count);
    up_.resize(header_count);
    down_.resize(header_count);
    column_.resize(header_count);
    row_.assign(header_count, kNone);
    size_.assign(header_count, 0);
    for (std::size_t c = 0; c < header_count; ++c) {
      left_[c] = c == 0 ? columns : c - 1;
      right_[c] = c == columns ? 0 : c + 1;
      up_[c] = down_[c] = c;
      column_[c] = c;
    }
    for (std::size_t r = 0; r < instance.subsets.size(); ++r) {
      const auto& covers = instance.subsets[r].covers;
      if (covers.empty()) continue;
      max_row_ = std::max(max_row_, covers.size());
      min_literals_ = std::min(min_literals_, instance.subsets[r].literals);
      std::size_t first = kNone;
      for (std::size_t element : covers) {
        const std::size_t col = element + 1;
        const std::size_t node = left_.size();
        left_.push_back(node);
        right_.push_back(node);
        up_.push_back(up_[col]);
        down_.push_back(col);
        column_.push_back(col);
        row_.push_back(r);
        size_.push_back(0);
        down_[up_[col]] = node;
        up_[col] = node;
        ++size_[col];
        if (first == kNone) {
          first = node;
        } else {
          left_[node] = left_[first];
          right_[node] = first;
          right_[left_[first]] = node;
          left_[first] = node;
        }
      }
    }
    remaining_ = columns;
    if (min_literals_ == std::numeric_limits<std::size_t>::max()) min_literals_ = 0;
  }

  std::size_t enumerate(const std::function<void(std::span<const std::size_t>)>& visit) {
    visit_ = &visit;
    prune_ = false;
    found_ = 0;
    search();
    return found_;
  }

  std::optional<CoverSolution> best() {
    prune_ = true;
    visit_ = nullptr;
    best_.reset();
    search();
    return best_;
  }

 private:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  void cover(std::size_t c) {
    right_[left_[c]] = right_[c];
    left_[right_[c]] = left_[c];
    for (std::size_t i = down_[c]; i != c; i = down_[i]) {
      for (std::size_t j = right_[i]; j != i; j = right_[j]) {
        down_[up_[j]] = down_[j];
        up_[down_[j]] = up_[j];
        --size_[column_[j]];
      }
    }
    --remaining_;
  }

  void uncover(std::size_t c) {
    ++remaining_;
    for (std::size_t i = up_[c]; i != c; i = up_[i]) {
      for (std::size_t j = left_[i]; j != i; j = left_[j]) {
        ++size_[column_[j]];
        down_[up_[j]] = j;
        up_[down_[j]] = j;
      }
    }
    right_[left_[c]] = c;
    left_[right_[c]] = c;
  }

  // True if the partial selection cannot beat or tie the incumbent.
  bool dominated() const {
    if (!best_) return false;
    const std::size_t extra = remaining_ == 0 ? 0 : (remaining_ + max_row_ - 1) / max_row_;
    const std::size_t subsets = chosen_.size() + extra;
    if (subsets != best_->subsets_used) return subsets > best_->subsets_used;
    return literals_ + extra * min_literals_ > best_->total_literals;
  }

  void record() {
    std::vector<std::size_t> sel = chosen_;
    std::sort(sel.begin(), sel.end());
    if (visit_) {
      ++found_;
      (*visit_)(sel);
      return;
    }
    CoverSolution candidate{sel, sel.size(), literals_};
    if (!best_ || std::tie(candidate.subsets_used, candidate.total_literals, candidate.selected) <
                      std::tie(best_->subsets_used, best_->total_literals, best_->selected)) {
      best_ = std::move(candidate);
    }
  }

  void search() {
    if (right_[0] == 0) {
      record();
      return;
    }
    if (prune_ && dominated()) return;
    std::size_t c = right_[0];
    for (std::size_t j = right_[c]; j != 0; j = right_[j]) {
      if (size_[j] < size_[c]) c = j;
    }
    if (size_[c] == 0) return;
    cover(c);
    for (std::size_t r = down_[c]; r != c; r = down_[r]) {
      chosen_.push_back(row_[r]);
      literals_ += instance_.subsets[row_[r]].literals;
      for (std::size_t j = right_[r]; j != r; j = right_[j]) cover(column_[j]);
      search();
      for (std::size_t j = left_[r]; j != r; j = left_[j]) uncover(column_[j]);
      literals_ -= instance_.subsets[row_[r]].literals;
      chosen_.pop_back();
    }
    uncover(c);
  }

  const CoverInstance& instance_;
  std::vector<std::size_t> left_, right_, up_, down_, column_, row_, size_;
  std::size_t remaining_ = 0;
  std::size_t max_row_ = 1;
  std::size_t min_literals_ = std::numeric_limits<std::size_t>::max();

  std::vector<std::size_t> chosen_;
  std::size_t literals_ = 0;
  bool prune_ = false;
  const std::function<void(std::span<const std::size_t>)>* visit_ = nullptr;
  std::size_t found_ = 0;
  std::optional<CoverSolution> best_;
};

void require_valid_indices(const CoverInstance& instance, std::span<const std::size_t> selected) {
  for (std::size_t s : selected) {
    if (s >= instance.subsets.size()) {
      throw Error(ErrorKind::Parameter, "subset index " + std::to_string(s) + " out of range");
    }
  }
}

void require_well_formed(const CoverInstance& instance) {
  for (const auto& s : instance.subsets) {
    for (std::size_t e : s.covers) {
      if (e >= instance.universe.size()) {
        throw Error(ErrorKind::Structural, "subset '" + s.name + "' covers an unknown element");
      }
    }
  }
}

}  // namespace

bool Conjunction::consistent_with(const FundamentalProduct& product) const {
  return std::all_of(positive.begin(), positive.end(),
                     [&](std::size_t p) { return product.contains(p); }) &&
         std::none_of(negative.begin(), negative.end(),
                      [&](std::size_t p) { return product.contains(p); });
}

std::vector<std::pair<std::size_t, bool>> Conjunction::literals() const {
  std::vector<std::pair<std::size_t, bool>> out;
  for (std::size_t p : positive) out.emplace_back(p, false);
  for (std::size_t p : negative) out.emplace_back(p, true);
  std::sort(out.begin(), out.end());
  return out;
}

std::string Conjunction::render(std::span<const std::string> primitive_ids) const {
  std::string out;
  for (const auto& [p, negated] : literals()) {
    if (!out.empty()) out += " & ";
    if (negated) out += "!";
    out += primitive_ids[p];
  }
  return out;
}

std::vector<std::size_t> CoverInstance::uncovered_elements() const {
  std::vector<char> seen(universe.size(), 0);
  for (const auto& s : subsets) {
    for (std::size_t e : s.covers) {
      if (e < seen.size()) seen[e] = 1;
    }
  }
  std::vector<std::size_t> out;
  for (std::size_t e = 0; e < seen.size(); ++e) {
    if (!seen[e]) out.push_back(e);
  }
  return out;
}

std::string to_string(CoverMode mode) {
  return mode == CoverMode::Partitioned ? "partitioned" : "global";
}

CoverInstance generate_candidates(const ProductTable& table, std::span<const Clique> cliques,
                                  const IntersectionGraph& graph, CoverMode mode) {
  if (graph.vertices() != table.primitives) {
    throw Error(ErrorKind::Structural, "product table and graph disagree on primitives");
  }
  const std::size_t n = graph.size();

  std::vector<std::size_t> universe_position(table.n_f(), std::numeric_limits<std::size_t>::max());
  CoverInstance instance;
  instance.primitives = table.primitives;
  for (std::size_t u : table.universe) {
    universe_position[u] = instance.universe.size();
    instance.universe.push_back(table.name(u));
    instance.universe_products.push_back(u);
  }

  struct Found {
    std::vector<std::size_t> covers;
    std::optional<std::size_t> clique;
  };
  std::map<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>, Found> found;

  auto offer = [&](Conjunction conj, std::optional<std::size_t> clique) {
    std::sort(conj.positive.begin(), conj.positive.end());
    std::sort(conj.negative.begin(), conj.negative.end());
    std::vector<std::size_t> covers;
    for (std::size_t i = 0; i < table.n_f(); ++i) {
      if (!conj.consistent_with(table.products[i])) continue;
      if (universe_position[i] == std::numeric_limits<std::size_t>::max()) return;
      covers.push_back(universe_position[i]);
    }
    if (covers.empty()) return;
    auto key = std::make_pair(conj.positive, conj.negative);
    auto it = found.find(key);
    if (it == found.end()) {
      found.emplace(std::move(key), Found{std::move(covers), clique});
    } else if (clique && it->second.clique &&
               cliques[*clique].members < cliques[*it->second.clique].members) {
      it->second.clique = clique;
    }
  };

  if (mode == CoverMode::Global) {
    if (n > 20) {
      throw Error(ErrorKind::Parameter, "global mode is limited to 20 primitives");
    }
    // Positive sets outside the cliques of the graph cover nothing.
    std::vector<std::size_t> pos;
    std::function<void(std::size_t)> walk = [&](std::size_t next) {
      for (std::size_t v = next; v < n; ++v) {
        if (!std::all_of(pos.begin(), pos.end(), [&](std::size_t u) { return graph.adjacent(u, v); }))
          continue;
        pos.push_back(v);
        std::vector<std::size_t> rest;
        for (std::size_t w = 0; w < n; ++w) {
          if (!contains(pos, w)) rest.push_back(w);
        }
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << rest.size()); ++mask) {
          Conjunction c{pos, {}};
          for (std::size_t b = 0; b < rest.size(); ++b) {
            if (mask >> b & 1) c.negative.push_back(rest[b]);
          }
          offer(std::move(c), std::nullopt);
        }
        walk(v + 1);
        pos.pop_back();
      }
    };
    walk(0);
  } else {
    for (std::size_t j = 0; j < cliques.size(); ++j) {
      const auto members = member_indices(graph, cliques[j]);
      const std::size_t k = members.size();
      std::uint64_t patterns = 1;
      for (std::size_t i = 0; i < k; ++i) patterns *= 3;
      for (std::uint64_t code = 0; code < patterns; ++code) {
        Conjunction base;
        std::uint64_t rem = code;
        for (std::size_t i = 0; i < k; ++i, rem /= 3) {
          if (rem % 3 == 1) base.positive.push_back(members[i]);
          if (rem % 3 == 2) base.negative.push_back(members[i]);
        }
        if (base.positive.empty()) continue;
        std::vector<std::size_t> outside;
        for (std::size_t p : base.positive) {
          for (std::size_t v : graph.neighbors(p)) {
            if (!contains(members, v)) outside.push_back(v);
          }
        }
        std::sort(outside.begin(), outside.end());
        outside.erase(std::unique(outside.begin(), outside.end()), outside.end());
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << outside.size()); ++mask) {
          Conjunction c = base;
          for (std::size_t b = 0; b < outside.size(); ++b) {
            if (mask >> b & 1) c.negative.push_back(outside[b]);
          }
          offer(std::move(c), j);
        }
      }
    }
  }

  struct Entry {
    Conjunction conj;
    Found info;
  };
  std::vector<Entry> entries;
  for (auto& [key, info] : found) entries.push_back({Conjunction{key.first, key.second}, info});
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.conj.literal_count() != b.conj.literal_count())
      return a.conj.literal_count() < b.conj.literal_count();
    return a.conj.literals() < b.conj.literals();
  });
  for (auto& e : entries) {
    CoverSubset s;
    s.name = e.conj.render(instance.primitives);
    s.covers = std::move(e.info.covers);
    s.literals = e.conj.literal_count();
    s.expression = std::move(e.conj);
    s.source_clique = e.info.clique;
    instance.subsets.push_back(std::move(s));
  }

  const auto missing = instance.uncovered_elements();
  if (!missing.empty()) {
    throw Error(ErrorKind::Infeasible,
                "universe element " + instance.universe[missing.front()] + " is covered by no candidate");
  }
  return instance;
}

CoverSolution solve_cover_dlx(const CoverInstance& instance) {
  require_well_formed(instance);
  const auto missing = instance.uncovered_elements();
  if (!missing.empty()) {
    throw Error(ErrorKind::Unsatisfiable,
                "no exact cover: element " + instance.universe[missing.front()] + " is uncoverable");
  }
  DancingLinks dlx(instance);
  auto best = dlx.best();
  if (!best) throw Error(ErrorKind::Unsatisfiable, "no exact cover exists");
  return *best;
}

std::size_t enumerate_exact_covers(const CoverInstance& instance,
                                   const std::function<void(std::span<const std::size_t>)>& visit) {
  require_well_formed(instance);
  DancingLinks dlx(instance);
  return dlx.enumerate(visit);
}

CoverSolution make_solution(const CoverInstance& instance, std::vector<std::size_t> selected) {
  require_valid_indices(instance, selected);
  std::sort(selected.begin(), selected.end());
  CoverSolution out;
  out.subsets_used = selected.size();
  for (std::size_t s : selected) out.total_literals += instance.subsets[s].literals;
  out.selected = std::move(selected);
  return out;
}

CsgTree assemble_tree(const CoverSolution& solution, const CoverInstance& instance) {
  if (solution.selected.empty()) throw Error(ErrorKind::Structural, "empty cover selection");
  require_valid_indices(instance, solution.selected);
  std::vector<CsgTree> terms;
  for (std::size_t s : solution.selected) {
    const auto& subset = instance.subsets[s];
    if (!subset.expression) {
      throw Error(ErrorKind::Structural, "subset '" + subset.name + "' has no literal expression");
    }
    std::vector<CsgTree> literals;
    for (const auto& [p, negated] : subset.expression->literals()) {
      CsgTree leaf = CsgTree::leaf(instance.primitives.at(p));
      literals.push_back(negated ? CsgTree::complement(std::move(leaf)) : std::move(leaf));
    }
    terms.push_back(literals.size() == 1 ? std::move(literals.front())
                                         : CsgTree::intersect(std::move(literals)));
  }
  if (terms.size() == 1) return std::move(terms.front());
  return CsgTree::unite(std::move(terms));
}

CoverCheck verify_cover(const CoverInstance& instance, std::span<const std::size_t> selected) {
  require_valid_indices(instance, selected);
  std::vector<std::size_t> times(instance.universe.size(), 0);
  for (std::size_t s : selected) {
    for (std::size_t e : instance.subsets[s].covers) ++times[e];
  }
  CoverCheck check;
  for (std::size_t e = 0; e < times.size(); ++e) {
    if (times[e] != 1) check.violations.push_back({e, times[e]});
  }
  check.valid = check.violations.empty();
  return check;
}

}  // namespace qcsg
