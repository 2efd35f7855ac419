#include "dsgd/problems.hpp"

#include <algorithm>
#include <numeric>

#include "dsgd/errors.hpp"

namespace dsgd {

void AgentObjective::full_gradient(std::span<const double> w, std::span<double> out) const {
  std::vector<std::size_t> all(sample_count());
  std::iota(all.begin(), all.end(), std::size_t{0});
  batch_gradient(w, all, out);
}

void AgentObjective::batch_gradient(std::span<const double> w, std::span<const std::size_t> indices,
                                    std::span<double> out) const {
  if (indices.empty()) throw InvalidArgument("batch_gradient: empty batch");
  std::fill(out.begin(), out.end(), 0.0);
  std::vector<double> g(dim());
  for (auto j : indices) {
    sample_gradient(w, j, g);
    for (std::size_t c = 0; c < g.size(); ++c) out[c] += g[c];
  }
  const double inv = 1.0 / static_cast<double>(indices.size());
  for (auto& v : out) v *= inv;
}

double AgentObjective::value_and_gradient(std::span<const double> w, std::span<double> out) const {
  full_gradient(w, out);
  return full_value(w);
}

Problem::Problem(std::vector<AgentObjectivePtr> a) : agents(std::move(a)) {
  if (agents.empty()) throw InvalidArgument("problem: no agents");
  dim = agents.front()->dim();
  for (const auto& agent : agents) {
    if (agent->dim() != dim) throw InvalidArgument("problem: agents disagree on parameter dimension");
    if (agent->sample_count() == 0) throw InvalidArgument("problem: agent without samples");
  }
}

double aggregate_value(const Problem& p, std::span<const double> stacked) {
  if (stacked.size() != p.stacked_size()) throw InvalidArgument("aggregate_value: length mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < p.agent_count(); ++i) {
    total += p.agents[i]->full_value(stacked.subspan(i * p.dim, p.dim));
  }
  return total;
}

void aggregate_gradient(const Problem& p, std::span<const double> stacked, std::span<double> out) {
  if (stacked.size() != p.stacked_size() || out.size() != stacked.size()) {
    throw InvalidArgument("aggregate_gradient: length mismatch");
  }
  for (std::size_t i = 0; i < p.agent_count(); ++i) {
    p.agents[i]->full_gradient(stacked.subspan(i * p.dim, p.dim), out.subspan(i * p.dim, p.dim));
  }
}

std::vector<double> aggregate_gradient(const Problem& p, std::span<const double> stacked) {
  std::vector<double> out(stacked.size());
  aggregate_gradient(p, stacked, out);
  return out;
}

// --- quadratic ---------------------------------------------------------------

QuadraticObjective::QuadraticObjective(std::vector<std::vector<double>> sample_centers)
    : centers_(std::move(sample_centers)) {
  if (centers_.empty()) throw InvalidArgument("quadratic: no sample centers");
  dim_ = centers_.front().size();
  if (dim_ == 0) throw InvalidArgument("quadratic: zero dimension");
  mean_.assign(dim_, 0.0);
  for (const auto& c : centers_) {
    if (c.size() != dim_) throw InvalidArgument("quadratic: center dimension mismatch");
    for (std::size_t d = 0; d < dim_; ++d) mean_[d] += c[d];
  }
  for (auto& v : mean_) v /= static_cast<double>(centers_.size());
}

double QuadraticObjective::full_value(std::span<const double> w) const {
  double total = 0.0;
  for (const auto& c : centers_) {
    double sq = 0.0;
    for (std::size_t d = 0; d < dim_; ++d) sq += (w[d] - c[d]) * (w[d] - c[d]);
    total += 0.5 * sq;
  }
  return total / static_cast<double>(centers_.size());
}

void QuadraticObjective::full_gradient(std::span<const double> w, std::span<double> out) const {
  for (std::size_t d = 0; d < dim_; ++d) out[d] = w[d] - mean_[d];
}

void QuadraticObjective::sample_gradient(std::span<const double> w, std::size_t j, std::span<double> out) const {
  const auto& c = centers_.at(j);
  for (std::size_t d = 0; d < dim_; ++d) out[d] = w[d] - c[d];
}

Problem quadratic_problem(const std::vector<std::vector<double>>& centers) {
  if (centers.empty()) throw InvalidArgument("quadratic_problem: no centers");
  std::vector<AgentObjectivePtr> agents;
  for (const auto& c : centers) {
    if (c.size() != centers.front().size()) throw InvalidArgument("quadratic_problem: dimension mismatch");
    agents.push_back(std::make_shared<QuadraticObjective>(std::vector<std::vector<double>>{c}));
  }
  return Problem(std::move(agents));
}

Problem quadratic_problem(const std::vector<std::vector<std::vector<double>>>& per_agent_samples) {
  if (per_agent_samples.empty()) throw InvalidArgument("quadratic_problem: no agents");
  std::vector<AgentObjectivePtr> agents;
  for (const auto& samples : per_agent_samples) agents.push_back(std::make_shared<QuadraticObjective>(samples));
  return Problem(std::move(agents));
}

// --- double well ---------------------------------------------------------------

DoubleWellObjective::DoubleWellObjective(double shift, std::vector<double> sample_offsets)
    : shift_(shift), offsets_(std::move(sample_offsets)) {
  if (offsets_.empty()) throw InvalidArgument("double well: no samples");
}

double DoubleWellObjective::full_value(std::span<const double> w) const {
  const double x = w[0];
  double offset_mean = 0.0;
  for (double o : offsets_) offset_mean += o;
  offset_mean /= static_cast<double>(offsets_.size());
  return 0.25 * (x * x - 1.0) * (x * x - 1.0) + (shift_ + offset_mean) * x;
}

void DoubleWellObjective::full_gradient(std::span<const double> w, std::span<double> out) const {
  double offset_mean = 0.0;
  for (double o : offsets_) offset_mean += o;
  offset_mean /= static_cast<double>(offsets_.size());
  const double x = w[0];
  out[0] = x * (x * x - 1.0) + shift_ + offset_mean;
}

void DoubleWellObjective::sample_gradient(std::span<const double> w, std::size_t j, std::span<double> out) const {
  const double x = w[0];
  out[0] = x * (x * x - 1.0) + shift_ + offsets_.at(j);
}

Problem double_well_problem(std::size_t n, const std::vector<double>& shifts) {
  return double_well_problem(n, shifts, std::vector<std::vector<double>>(n, std::vector<double>{0.0}));
}

Problem double_well_problem(std::size_t n, const std::vector<double>& shifts,
                            const std::vector<std::vector<double>>& sample_offsets) {
  if (n == 0) throw InvalidArgument("double_well_problem: no agents");
  if (shifts.size() != n || sample_offsets.size() != n) {
    throw InvalidArgument("double_well_problem: expected one shift and offset list per agent");
  }
  std::vector<AgentObjectivePtr> agents;
  for (std::size_t i = 0; i < n; ++i) agents.push_back(std::make_shared<DoubleWellObjective>(shifts[i], sample_offsets[i]));
  return Problem(std::move(agents));
}

}  // namespace dsgd
