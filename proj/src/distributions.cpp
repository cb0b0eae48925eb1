#include "stackrl/distributions.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "stackrl/errors.hpp"

namespace stackrl {
namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5 * log(2 pi)

void require_positive_sigma(std::span<const double> sigma) {
  for (double s : sigma) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw InvariantViolation("policy sigma must be positive and finite, got " +
                               std::to_string(s));
    }
  }
}

double log_sum_exp(std::span<const double> x) {
  double m = x[0];
  for (double v : x) m = std::max(m, v);
  double s = 0.0;
  for (double v : x) s += std::exp(v - m);
  return m + std::log(s);
}

std::span<const double> row_span(const Mat& m, Eigen::Index r) {
  return {m.data() + r * m.cols(), static_cast<std::size_t>(m.cols())};
}

}  // namespace

double gaussian_log_prob(std::span<const double> mean, std::span<const double> sigma,
                         std::span<const double> action) {
  if (mean.size() != sigma.size() || mean.size() != action.size()) {
    throw ConfigError("gaussian log_prob: action dimension does not match the mean");
  }
  require_positive_sigma(sigma);
  double lp = 0.0;
  for (std::size_t i = 0; i < mean.size(); ++i) {
    const double d = action[i] - mean[i];
    lp += -std::log(sigma[i]) - kHalfLog2Pi - d * d / (2.0 * sigma[i] * sigma[i]);
  }
  return lp;
}

double categorical_log_prob(std::span<const double> logits, int action) {
  if (action < 0 || static_cast<std::size_t>(action) >= logits.size()) {
    throw ConfigError("categorical log_prob: action index " + std::to_string(action) +
                      " out of range");
  }
  return logits[static_cast<std::size_t>(action)] - log_sum_exp(logits);
}

Vec log_prob(const PolicyBatch& batch, const Mat& actions) {
  const Eigen::Index n = batch.size();
  if (actions.rows() != n) throw ConfigError("log_prob: batch and action rows differ");
  Vec out(n);
  if (batch.head == PolicyHead::kGaussian) {
    const RowVec sigma = batch.log_sigma.array().exp();
    const std::span<const double> s(sigma.data(), static_cast<std::size_t>(sigma.size()));
    for (Eigen::Index i = 0; i < n; ++i) {
      out(i) = gaussian_log_prob(row_span(batch.dist, i), s, row_span(actions, i));
    }
  } else {
    for (Eigen::Index i = 0; i < n; ++i) {
      out(i) = categorical_log_prob(row_span(batch.dist, i), static_cast<int>(actions(i, 0)));
    }
  }
  return out;
}

Vec entropy(const PolicyBatch& batch) {
  const Eigen::Index n = batch.size();
  Vec out(n);
  if (batch.head == PolicyHead::kGaussian) {
    const double h = batch.log_sigma.sum() + static_cast<double>(batch.log_sigma.size()) *
                                                 (0.5 + kHalfLog2Pi);
    out.setConstant(h);
  } else {
    for (Eigen::Index i = 0; i < n; ++i) {
      const RowVec p = softmax(batch.dist.row(i));
      double h = 0.0;
      for (Eigen::Index j = 0; j < p.size(); ++j) {
        if (p(j) > 0.0) h -= p(j) * std::log(p(j));
      }
      out(i) = h;
    }
  }
  return out;
}

Vec kl_divergence(const PolicyBatch& old_batch, const PolicyBatch& new_batch) {
  if (old_batch.head != new_batch.head || old_batch.dist.rows() != new_batch.dist.rows() ||
      old_batch.dist.cols() != new_batch.dist.cols()) {
    throw ConfigError("kl: distributions differ in family or dimension");
  }
  const Eigen::Index n = old_batch.size();
  Vec out(n);
  if (old_batch.head == PolicyHead::kGaussian) {
    const RowVec so = old_batch.log_sigma.array().exp();
    const RowVec sn = new_batch.log_sigma.array().exp();
    require_positive_sigma({so.data(), static_cast<std::size_t>(so.size())});
    require_positive_sigma({sn.data(), static_cast<std::size_t>(sn.size())});
    for (Eigen::Index i = 0; i < n; ++i) {
      double kl = 0.0;
      for (Eigen::Index j = 0; j < so.size(); ++j) {
        const double dm = old_batch.dist(i, j) - new_batch.dist(i, j);
        kl += std::log(sn(j) / so(j)) + (so(j) * so(j) + dm * dm) / (2.0 * sn(j) * sn(j)) - 0.5;
      }
      out(i) = kl;
    }
  } else {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double lse_old = log_sum_exp(row_span(old_batch.dist, i));
      const double lse_new = log_sum_exp(row_span(new_batch.dist, i));
      double kl = 0.0;
      for (Eigen::Index j = 0; j < old_batch.dist.cols(); ++j) {
        const double lp_old = old_batch.dist(i, j) - lse_old;
        const double lp_new = new_batch.dist(i, j) - lse_new;
        kl += std::exp(lp_old) * (lp_old - lp_new);
      }
      out(i) = kl;
    }
  }
  return out;
}

RowVec softmax(const RowVec& logits) {
  RowVec p = (logits.array() - logits.maxCoeff()).exp();
  return p / p.sum();
}

RowVec sample_action(const PolicyBatch& batch, Eigen::Index row, CounterRng& rng,
                     bool deterministic) {
  if (batch.head == PolicyHead::kGaussian) {
    RowVec a = batch.dist.row(row);
    if (!deterministic) {
      for (Eigen::Index j = 0; j < a.size(); ++j) {
        a(j) += std::exp(batch.log_sigma(j)) * rng.normal();
      }
    }
    return a;
  }
  const RowVec logits = batch.dist.row(row);
  RowVec out(1);
  if (deterministic) {
    Eigen::Index best = 0;
    logits.maxCoeff(&best);
    out(0) = static_cast<double>(best);
    return out;
  }
  const RowVec p = softmax(logits);
  const double u = rng.uniform();
  double acc = 0.0;
  Eigen::Index pick = p.size() - 1;
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    acc += p(j);
    if (u < acc) {
      pick = j;
      break;
    }
  }
  out(0) = static_cast<double>(pick);
  return out;
}

}  // namespace stackrl
