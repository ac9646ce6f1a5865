/* Copyright 2026 The BLR Kernels Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "blr/error.hpp"
#include "blr/formats.hpp"
#include "blr/svd.hpp"

namespace blr {

namespace {

using Vec = std::vector<double>;

// Solves (G + damping * mean(diag G) * I) X = rhs for symmetric positive
// semi-definite G (n x n) and rhs (n x m), both row-major. Cholesky with the
// damping raised tenfold until the factorization succeeds.
Vec solve_damped(const Vec& g, const Vec& rhs, std::size_t n, std::size_t m,
                 double damping) {
  double mean_diag = 0.0;
  for (std::size_t k = 0; k < n; ++k) mean_diag += g[k * n + k];
  mean_diag = mean_diag > 0.0 ? mean_diag / n : 1.0;

  Vec chol(n * n);
  for (double lambda = damping * mean_diag;; lambda = lambda * 10.0 + 1e-300) {
    bool ok = true;
    for (std::size_t a = 0; a < n && ok; ++a) {
      for (std::size_t c = 0; c <= a; ++c) {
        double sum = g[a * n + c] + (a == c ? lambda : 0.0);
        for (std::size_t k = 0; k < c; ++k) sum -= chol[a * n + k] * chol[c * n + k];
        if (a == c) {
          if (!(sum > 0.0)) {
            ok = false;
            break;
          }
          chol[a * n + a] = std::sqrt(sum);
        } else {
          chol[a * n + c] = sum / chol[c * n + c];
        }
      }
    }
    if (ok) break;
    if (!std::isfinite(lambda) || lambda > 1e300) {
      throw ConvergenceError("preconditioner is not positive definite");
    }
  }

  Vec x = rhs;
  for (std::size_t col = 0; col < m; ++col) {
    for (std::size_t a = 0; a < n; ++a) {
      double sum = x[a * m + col];
      for (std::size_t k = 0; k < a; ++k) sum -= chol[a * n + k] * x[k * m + col];
      x[a * m + col] = sum / chol[a * n + a];
    }
    for (std::size_t a = n; a-- > 0;) {
      double sum = x[a * m + col];
      for (std::size_t k = a + 1; k < n; ++k) sum -= chol[k * n + a] * x[k * m + col];
      x[a * m + col] = sum / chol[a * n + a];
    }
  }
  return x;
}

// Working state in double; layouts match BlastFactors.
class BlastFitter {
 public:
  BlastFitter(const Tensor& w, std::size_t blocks, std::size_t rank,
              const BlastFitOptions& options)
      : b_(blocks),
        r_(rank),
        p_(w.dim(0) / blocks),
        q_(w.dim(1) / blocks),
        o_(w.dim(1)),
        w_(w.data().begin(), w.data().end()),
        opt_(options),
        v_(b_ * p_ * r_),
        s_(b_ * b_ * r_, 1.0),
        u_(b_ * r_ * q_) {}

  double w_at(std::size_t l, std::size_t k, std::size_t x, std::size_t y) const {
    return w_[(l * p_ + x) * o_ + k * q_ + y];
  }

  void initialize() {
    std::mt19937_64 rng(opt_.seed);
    std::normal_distribution<double> dist(0.0, 1.0 / std::sqrt(double(r_)));
    for (double& x : v_) x = dist(rng);
    for (double& x : u_) x = dist(rng);
    try {
      init_subspaces();
    } catch (const ConvergenceError&) {
      // Keep the random draw.
    }
    if (opt_.init == BlastInit::svd) {
      update_s(1.0);
    }
  }

  std::size_t parameter_count() const { return v_.size() + s_.size() + u_.size(); }

  void step() {
    update_v(opt_.learning_rate);
    update_u(opt_.learning_rate);
    update_s(opt_.learning_rate);
  }

  // One Levenberg-Marquardt step on all factors. Retries with a larger
  // damping until the loss does not increase; returns the new loss.
  double joint_step(double current_loss) {
    const std::size_t m = parameter_count();
    const std::size_t os = v_.size(), ou = os + s_.size();
    Vec jtj(m * m, 0.0), jte(m, 0.0);
    std::vector<std::size_t> idx(3 * r_);
    Vec val(3 * r_);
    for (std::size_t l = 0; l < b_; ++l) {
      for (std::size_t k = 0; k < b_; ++k) {
        const double* s = &s_[(l * b_ + k) * r_];
        for (std::size_t x = 0; x < p_; ++x) {
          const double* v = &v_[(l * p_ + x) * r_];
          for (std::size_t y = 0; y < q_; ++y) {
            double pred = 0.0;
            for (std::size_t rho = 0; rho < r_; ++rho) {
              const double u = u_[(k * r_ + rho) * q_ + y];
              pred += v[rho] * s[rho] * u;
              idx[rho] = (l * p_ + x) * r_ + rho;
              val[rho] = s[rho] * u;
              idx[r_ + rho] = os + (l * b_ + k) * r_ + rho;
              val[r_ + rho] = v[rho] * u;
              idx[2 * r_ + rho] = ou + (k * r_ + rho) * q_ + y;
              val[2 * r_ + rho] = v[rho] * s[rho];
            }
            const double e = w_at(l, k, x, y) - pred;
            for (std::size_t a = 0; a < 3 * r_; ++a) {
              jte[idx[a]] += val[a] * e;
              double* row = &jtj[idx[a] * m];
              for (std::size_t c = 0; c < 3 * r_; ++c) row[idx[c]] += val[a] * val[c];
            }
          }
        }
      }
    }
    const State start = state();
    for (int attempt = 0; attempt < 30; ++attempt) {
      Vec damped = jtj;
      for (std::size_t a = 0; a < m; ++a) {
        damped[a * m + a] += lambda_ * std::max(jtj[a * m + a], 1e-12);
      }
      const Vec delta = solve_damped(damped, jte, m, 1, opt_.damping);
      for (std::size_t a = 0; a < m; ++a) param(a) += delta[a];
      const double trial = loss();
      if (std::isfinite(trial) && trial <= current_loss) {
        lambda_ = std::max(lambda_ / 3.0, 1e-12);
        return trial;
      }
      restore(start);
      lambda_ *= 4.0;
    }
    return current_loss;
  }

  double loss() const {
    double total = 0.0;
    std::vector<double> row(q_);
    for (std::size_t l = 0; l < b_; ++l) {
      for (std::size_t k = 0; k < b_; ++k) {
        const double* s = &s_[(l * b_ + k) * r_];
        for (std::size_t x = 0; x < p_; ++x) {
          std::fill(row.begin(), row.end(), 0.0);
          for (std::size_t rho = 0; rho < r_; ++rho) {
            const double coef = v_[(l * p_ + x) * r_ + rho] * s[rho];
            const double* u = &u_[(k * r_ + rho) * q_];
            for (std::size_t y = 0; y < q_; ++y) row[y] += coef * u[y];
          }
          for (std::size_t y = 0; y < q_; ++y) {
            const double d = w_at(l, k, x, y) - row[y];
            total += d * d;
          }
        }
      }
    }
    return total;
  }

  struct State {
    Vec v, s, u;
  };
  State state() const { return {v_, s_, u_}; }
  void restore(const State& st) {
    v_ = st.v;
    s_ = st.s;
    u_ = st.u;
  }
  // Moves to current + factor * (current - previous).
  void extrapolate(const State& previous, double factor) {
    auto move = [factor](Vec& cur, const Vec& prev) {
      for (std::size_t j = 0; j < cur.size(); ++j) cur[j] += factor * (cur[j] - prev[j]);
    };
    move(v_, previous.v);
    move(s_, previous.s);
    move(u_, previous.u);
  }

  BlastFactors factors() const {
    BlastFactors f;
    f.v = Tensor({b_, p_, r_}, std::vector<float>(v_.begin(), v_.end()));
    f.s = Tensor({b_, b_, r_}, std::vector<float>(s_.begin(), s_.end()));
    f.u = Tensor({b_, r_, q_}, std::vector<float>(u_.begin(), u_.end()));
    return f;
  }

 private:
  // V_l spans the dominant left subspace of block row l, U_k the dominant
  // right subspace of block column k.
  void init_subspaces() {
    Vec block_row(p_ * o_);
    for (std::size_t l = 0; l < b_; ++l) {
      std::copy(w_.begin() + l * p_ * o_, w_.begin() + (l + 1) * p_ * o_,
                block_row.begin());
      const SvdResult svd = jacobi_svd(block_row, p_, o_);
      const std::size_t keep = std::min(r_, svd.k);
      for (std::size_t x = 0; x < p_; ++x) {
        for (std::size_t rho = 0; rho < keep; ++rho) {
          v_[(l * p_ + x) * r_ + rho] = svd.u[x * svd.k + rho];
        }
      }
    }
    Vec block_col(b_ * p_ * q_);
    for (std::size_t k = 0; k < b_; ++k) {
      for (std::size_t row = 0; row < b_ * p_; ++row) {
        for (std::size_t y = 0; y < q_; ++y) {
          block_col[row * q_ + y] = w_[row * o_ + k * q_ + y];
        }
      }
      const SvdResult svd = jacobi_svd(block_col, b_ * p_, q_);
      const std::size_t keep = std::min(r_, svd.k);
      for (std::size_t rho = 0; rho < keep; ++rho) {
        for (std::size_t y = 0; y < q_; ++y) {
          u_[(k * r_ + rho) * q_ + y] = svd.v[y * svd.k + rho];
        }
      }
    }
  }

  // U_k U_k^T, r x r.
  Vec u_gram(std::size_t k) const {
    Vec g(r_ * r_, 0.0);
    for (std::size_t a = 0; a < r_; ++a) {
      for (std::size_t c = 0; c <= a; ++c) {
        double sum = 0.0;
        for (std::size_t y = 0; y < q_; ++y) {
          sum += u_[(k * r_ + a) * q_ + y] * u_[(k * r_ + c) * q_ + y];
        }
        g[a * r_ + c] = g[c * r_ + a] = sum;
      }
    }
    return g;
  }

  // V_l^T V_l, r x r.
  Vec v_gram(std::size_t l) const {
    Vec g(r_ * r_, 0.0);
    for (std::size_t a = 0; a < r_; ++a) {
      for (std::size_t c = 0; c <= a; ++c) {
        double sum = 0.0;
        for (std::size_t x = 0; x < p_; ++x) {
          sum += v_[(l * p_ + x) * r_ + a] * v_[(l * p_ + x) * r_ + c];
        }
        g[a * r_ + c] = g[c * r_ + a] = sum;
      }
    }
    return g;
  }

  // W_{l,k} U_k^T, p x r.
  Vec w_ut(std::size_t l, std::size_t k) const {
    Vec out(p_ * r_, 0.0);
    for (std::size_t x = 0; x < p_; ++x) {
      for (std::size_t rho = 0; rho < r_; ++rho) {
        double sum = 0.0;
        const double* u = &u_[(k * r_ + rho) * q_];
        for (std::size_t y = 0; y < q_; ++y) sum += w_at(l, k, x, y) * u[y];
        out[x * r_ + rho] = sum;
      }
    }
    return out;
  }

  // V_l^T W_{l,k}, r x q.
  Vec vt_w(std::size_t l, std::size_t k) const {
    Vec out(r_ * q_, 0.0);
    for (std::size_t x = 0; x < p_; ++x) {
      for (std::size_t rho = 0; rho < r_; ++rho) {
        const double v = v_[(l * p_ + x) * r_ + rho];
        double* dst = &out[rho * q_];
        for (std::size_t y = 0; y < q_; ++y) dst[y] += v * w_at(l, k, x, y);
      }
    }
    return out;
  }

  void update_v(double lr) {
    std::vector<Vec> uu(b_);
    for (std::size_t k = 0; k < b_; ++k) uu[k] = u_gram(k);
    for (std::size_t l = 0; l < b_; ++l) {
      Vec gram(r_ * r_, 0.0);
      Vec target(p_ * r_, 0.0);
      for (std::size_t k = 0; k < b_; ++k) {
        const double* s = &s_[(l * b_ + k) * r_];
        for (std::size_t a = 0; a < r_; ++a) {
          for (std::size_t c = 0; c < r_; ++c) {
            gram[a * r_ + c] += s[a] * s[c] * uu[k][a * r_ + c];
          }
        }
        const Vec wu = w_ut(l, k);
        for (std::size_t x = 0; x < p_; ++x) {
          for (std::size_t rho = 0; rho < r_; ++rho) {
            target[x * r_ + rho] += wu[x * r_ + rho] * s[rho];
          }
        }
      }
      // grad^T = G V_l^T - target^T  (r x p)
      Vec grad_t(r_ * p_, 0.0);
      for (std::size_t a = 0; a < r_; ++a) {
        for (std::size_t x = 0; x < p_; ++x) {
          double sum = -target[x * r_ + a];
          for (std::size_t c = 0; c < r_; ++c) {
            sum += gram[a * r_ + c] * v_[(l * p_ + x) * r_ + c];
          }
          grad_t[a * p_ + x] = sum;
        }
      }
      const Vec step = solve_damped(gram, grad_t, r_, p_, opt_.damping);
      for (std::size_t a = 0; a < r_; ++a) {
        for (std::size_t x = 0; x < p_; ++x) {
          v_[(l * p_ + x) * r_ + a] -= lr * step[a * p_ + x];
        }
      }
    }
  }

  void update_u(double lr) {
    std::vector<Vec> vv(b_);
    for (std::size_t l = 0; l < b_; ++l) vv[l] = v_gram(l);
    for (std::size_t k = 0; k < b_; ++k) {
      Vec gram(r_ * r_, 0.0);
      Vec target(r_ * q_, 0.0);
      for (std::size_t l = 0; l < b_; ++l) {
        const double* s = &s_[(l * b_ + k) * r_];
        for (std::size_t a = 0; a < r_; ++a) {
          for (std::size_t c = 0; c < r_; ++c) {
            gram[a * r_ + c] += s[a] * s[c] * vv[l][a * r_ + c];
          }
        }
        const Vec vw = vt_w(l, k);
        for (std::size_t rho = 0; rho < r_; ++rho) {
          for (std::size_t y = 0; y < q_; ++y) {
            target[rho * q_ + y] += s[rho] * vw[rho * q_ + y];
          }
        }
      }
      Vec grad(r_ * q_, 0.0);
      for (std::size_t a = 0; a < r_; ++a) {
        for (std::size_t y = 0; y < q_; ++y) {
          double sum = -target[a * q_ + y];
          for (std::size_t c = 0; c < r_; ++c) {
            sum += gram[a * r_ + c] * u_[(k * r_ + c) * q_ + y];
          }
          grad[a * q_ + y] = sum;
        }
      }
      const Vec step = solve_damped(gram, grad, r_, q_, opt_.damping);
      for (std::size_t j = 0; j < r_ * q_; ++j) u_[k * r_ * q_ + j] -= lr * step[j];
    }
  }

  void update_s(double lr) {
    std::vector<Vec> vv(b_), uu(b_);
    for (std::size_t l = 0; l < b_; ++l) vv[l] = v_gram(l);
    for (std::size_t k = 0; k < b_; ++k) uu[k] = u_gram(k);
    for (std::size_t l = 0; l < b_; ++l) {
      for (std::size_t k = 0; k < b_; ++k) {
        double* s = &s_[(l * b_ + k) * r_];
        Vec hess(r_ * r_);
        for (std::size_t j = 0; j < r_ * r_; ++j) hess[j] = vv[l][j] * uu[k][j];
        const Vec wu = w_ut(l, k);
        Vec grad(r_, 0.0);
        for (std::size_t a = 0; a < r_; ++a) {
          double diag = 0.0;
          for (std::size_t x = 0; x < p_; ++x) {
            diag += v_[(l * p_ + x) * r_ + a] * wu[x * r_ + a];
          }
          double hs = 0.0;
          for (std::size_t c = 0; c < r_; ++c) hs += hess[a * r_ + c] * s[c];
          grad[a] = hs - diag;
        }
        const Vec step = solve_damped(hess, grad, r_, 1, opt_.damping);
        for (std::size_t a = 0; a < r_; ++a) s[a] -= lr * step[a];
      }
    }
  }

  double& param(std::size_t a) {
    if (a < v_.size()) return v_[a];
    a -= v_.size();
    if (a < s_.size()) return s_[a];
    return u_[a - s_.size()];
  }

  double lambda_ = 1e-3;
  std::size_t b_, r_, p_, q_, o_;
  Vec w_;
  BlastFitOptions opt_;
  Vec v_, s_, u_;
};

}  // namespace

BlastFit factor_blast(const Tensor& w, std::size_t blocks, std::size_t rank,
                      const BlastFitOptions& options) {
  if (w.rank() != 2) throw ShapeError("factor_blast needs a 2-D weight");
  const std::size_t i = w.dim(0), o = w.dim(1);
  if (blocks < 1 || i % blocks != 0 || o % blocks != 0) {
    throw ShapeError("b=" + std::to_string(blocks) + " must divide i=" +
                     std::to_string(i) + " and o=" + std::to_string(o));
  }
  if (rank < 1 || rank > std::min(i, o)) {
    throw ShapeError("BLAST rank " + std::to_string(rank) +
                     " outside [1, min(i, o)]");
  }
  if (!(options.learning_rate > 0.0)) {
    throw ShapeError("learning rate must be positive");
  }

  BlastFitter fitter(w, blocks, rank, options);
  fitter.initialize();

  BlastFit fit;
  fit.loss_trace.reserve(options.steps + 1);
  double loss = fitter.loss();
  if (!std::isfinite(loss)) throw DivergenceError(0, loss);
  fit.loss_trace.push_back(loss);
  const bool joint = fitter.parameter_count() <= options.joint_max_params;
  double factor = 1.0;
  std::size_t stalled = 0;
  for (std::size_t step = 1; step <= options.steps; ++step) {
    if (joint) {
      // Once the loss stops moving the remaining steps repeat it.
      if (stalled < 3) {
        const double next = fitter.joint_step(loss);
        stalled = next >= loss * (1.0 - 1e-12) ? stalled + 1 : 0;
        loss = next;
      }
      fit.loss_trace.push_back(loss);
      continue;
    }
    const auto previous = fitter.state();
    fitter.step();
    loss = fitter.loss();
    if (options.extrapolate && std::isfinite(loss)) {
      const auto accepted = fitter.state();
      fitter.extrapolate(previous, factor);
      const double trial = fitter.loss();
      if (trial < loss) {
        loss = trial;
        factor = std::min(factor * 2.0, 64.0);
      } else {
        fitter.restore(accepted);
        factor = 1.0;
      }
    }
    if (!std::isfinite(loss)) throw DivergenceError(step, loss);
    fit.loss_trace.push_back(loss);
  }
  const double norm = frobenius_norm(w);
  fit.relative_error = norm > 0.0 ? std::sqrt(loss) / norm : std::sqrt(loss);
  fit.factors = fitter.factors();
  return fit;
}

}  // namespace blr
