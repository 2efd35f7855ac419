#include "dsgd/oracle.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "dsgd/errors.hpp"

namespace dsgd {

void Scaling::apply(std::span<const double> in, std::span<double> out) const {
  const std::size_t d = in.size();
  if (!diagonal.empty()) {
    for (std::size_t c = 0; c < d; ++c) out[c] = diagonal[c] * in[c];
    return;
  }
  for (std::size_t r = 0; r < d; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < d; ++c) acc += dense[r * d + c] * in[c];
    out[r] = acc;
  }
}

void OracleConfig::validate(std::size_t dim, std::size_t min_samples) const {
  if (mode != OracleMode::single && batch == 0) throw InvalidArgument("oracle: batch size must be at least 1");
  if (sampling == Sampling::without_replacement && draws_per_call() > min_samples) {
    throw InvalidArgument("oracle: batch of " + std::to_string(draws_per_call()) + " exceeds the " +
                          std::to_string(min_samples) + " samples of the smallest agent");
  }
  if (mode != OracleMode::scaled) return;
  if (scaling.empty()) throw InvalidArgument("oracle: scaled mode needs a scaling matrix");
  if (!scaling.diagonal.empty()) {
    if (scaling.diagonal.size() != dim) throw InvalidArgument("oracle: scaling diagonal has wrong length");
    for (double v : scaling.diagonal)
      if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument("oracle: scaling is not positive definite");
    return;
  }
  if (scaling.dense.size() != dim * dim) throw InvalidArgument("oracle: scaling matrix has wrong size");
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> h(
      scaling.dense.data(), static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  if (!h.isApprox(h.transpose(), 1e-12)) throw InvalidArgument("oracle: scaling matrix is not symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(h);
  if (llt.info() != Eigen::Success) throw InvalidArgument("oracle: scaling is not positive definite");
}

OracleMode parse_oracle_mode(std::string_view text) {
  if (text == "single") return OracleMode::single;
  if (text == "minibatch") return OracleMode::minibatch;
  if (text == "scaled") return OracleMode::scaled;
  throw InvalidArgument("oracle mode must be single, minibatch or scaled, got '" + std::string(text) + "'");
}

Sampling parse_sampling(std::string_view text) {
  if (text == "with-replacement") return Sampling::with_replacement;
  if (text == "without-replacement") return Sampling::without_replacement;
  throw InvalidArgument("sampling must be with-replacement or without-replacement, got '" + std::string(text) + "'");
}

std::string_view to_string(OracleMode m) {
  switch (m) {
    case OracleMode::single: return "single";
    case OracleMode::minibatch: return "minibatch";
    case OracleMode::scaled: return "scaled";
  }
  return "?";
}

std::string_view to_string(Sampling s) {
  return s == Sampling::with_replacement ? "with-replacement" : "without-replacement";
}

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t agent_seed(std::uint64_t master, std::size_t agent) {
  return mix_seed(mix_seed(master) ^ (0xd1b54a32d192ed03ULL * (static_cast<std::uint64_t>(agent) + 1)));
}

std::size_t SampleStream::uniform_index(std::size_t m) {
  // Rejection sampling keeps the draw exactly uniform and platform independent.
  const std::uint64_t range = m;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t r = engine_();
  while (r >= limit) r = engine_();
  return static_cast<std::size_t>(r % range);
}

void SampleStream::draw(std::size_t m, Sampling sampling, std::size_t count, std::vector<std::size_t>& out) {
  if (m == 0) throw InvalidArgument("oracle: agent has no samples");
  out.clear();
  if (sampling == Sampling::with_replacement) {
    for (std::size_t s = 0; s < count; ++s) out.push_back(uniform_index(m));
    return;
  }
  if (count > m) throw InvalidArgument("oracle: batch exceeds sample count without replacement");
  if (permutation_.size() != m) {
    permutation_.resize(m);
    cursor_ = m;
  }
  for (std::size_t s = 0; s < count; ++s) {
    if (cursor_ == m) {
      for (std::size_t i = 0; i < m; ++i) permutation_[i] = i;
      for (std::size_t i = m; i > 1; --i) std::swap(permutation_[i - 1], permutation_[uniform_index(i)]);
      cursor_ = 0;
    }
    out.push_back(permutation_[cursor_++]);
  }
}

void sample_direction(const OracleConfig& cfg, const AgentObjective& agent, SampleStream& stream,
                      std::span<const double> w, std::span<double> out) {
  thread_local std::vector<std::size_t> indices;
  stream.draw(agent.sample_count(), cfg.sampling, cfg.draws_per_call(), indices);
  if (cfg.mode == OracleMode::single) {
    agent.sample_gradient(w, indices.front(), out);
    return;
  }
  agent.batch_gradient(w, indices, out);
  if (cfg.mode == OracleMode::scaled) {
    thread_local std::vector<double> avg;
    avg.assign(out.begin(), out.end());
    cfg.scaling.apply(avg, out);
  }
}

std::vector<double> empirical_bias(const OracleConfig& cfg, const AgentObjective& agent, std::span<const double> w,
                                   std::size_t trials) {
  if (trials == 0) throw InvalidArgument("empirical_bias: trials must be at least 1");
  const std::size_t d = agent.dim();
  SampleStream stream(cfg.seed);
  std::vector<double> sum(d, 0.0), g(d);
  for (std::size_t t = 0; t < trials; ++t) {
    sample_direction(cfg, agent, stream, w, g);
    for (std::size_t c = 0; c < d; ++c) sum[c] += g[c];
  }
  agent.full_gradient(w, g);
  for (std::size_t c = 0; c < d; ++c) sum[c] = sum[c] / static_cast<double>(trials) - g[c];
  return sum;
}

}  // namespace dsgd
