#include "carve/object_flow.hpp"

#include <algorithm>

#include "carve/error.hpp"

namespace carve {

namespace {

bool intersects(const std::vector<RefId>& a, const std::vector<RefId>& b) {
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i == *j) return true;
    if (*i < *j) ++i;
    else ++j;
  }
  return false;
}

std::vector<std::pair<std::size_t, std::size_t>> seed_statements(const Analysis& a) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t p = 0; p < a.paths.size(); ++p)
    for (std::size_t k = 0; k < a.paths[p].statements.size(); ++k)
      if (a.has_dep(a.paths[p].statements[k])) out.emplace_back(p, k);
  return out;
}

}  // namespace

FlowSlice slice_statements(const std::vector<StatementNode>& statements, std::size_t k) {
  if (k >= statements.size()) throw Error(ErrorKind::Usage, "seed index out of range");
  FlowSlice out;
  out.seed = k;
  std::vector<char> in_slice(k, 0);
  std::vector<std::size_t> work{k};
  while (!work.empty()) {
    std::size_t n = work.back();
    work.pop_back();
    const auto& used = statements[n].used;
    if (used.empty()) continue;
    for (std::size_t l = n; l-- > 0;) {
      if (!intersects(statements[l].mutated, used)) continue;
      out.edges.emplace_back(l, n);
      if (!in_slice[l]) {
        in_slice[l] = 1;
        work.push_back(l);
      }
    }
  }
  for (std::size_t l = 0; l < k; ++l)
    if (in_slice[l]) out.members.push_back(l);
  std::sort(out.edges.begin(), out.edges.end());
  out.edges.erase(std::unique(out.edges.begin(), out.edges.end()), out.edges.end());
  return out;
}

FlowSlice compute_slice(const Analysis& analysis, std::size_t path, std::size_t k) {
  if (path >= analysis.paths.size()) throw Error(ErrorKind::Usage, "path index out of range");
  const auto& stmts = analysis.paths[path].statements;
  if (k >= stmts.size()) throw Error(ErrorKind::Usage, "seed index " + std::to_string(k) + " out of range");
  if (!analysis.has_dep(stmts[k]))
    throw Error(ErrorKind::Usage, "seed statement " + std::to_string(k) + " spawned no dependency context");
  FlowSlice s = slice_statements(stmts, k);
  s.path = path;
  return s;
}

std::vector<FlowSlice> compute_all_slices_serial(const Analysis& analysis) {
  std::vector<FlowSlice> out;
  for (auto [p, k] : seed_statements(analysis)) out.push_back(compute_slice(analysis, p, k));
  return out;
}

std::vector<FlowSlice> compute_all_slices(const Analysis& analysis) {
  const auto seeds = seed_statements(analysis);
  std::vector<FlowSlice> out(seeds.size());
  const long n = static_cast<long>(seeds.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    out[i] = slice_statements(analysis.paths[seeds[i].first].statements, seeds[i].second);
    out[i].path = seeds[i].first;
  }
  return out;
}

Json slices_to_json(const std::vector<FlowSlice>& slices) {
  Json out = Json::array();
  for (const auto& s : slices) {
    Json edges = Json::array();
    for (auto [l, n] : s.edges) edges.push_back(Json::array({l, n}));
    out.push_back(Json{{"path", s.path}, {"seed", s.seed}, {"O", s.members}, {"edges", std::move(edges)}});
  }
  return out;
}

}  // namespace carve
