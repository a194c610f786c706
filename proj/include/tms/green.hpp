#pragma once

// Green-type series G(f, x | lambda) = sum_n lambda^{-n} (L^n f)(x) with a
// certified truncation error.  The certificate is empirical-geometric: once
// the per-step ratios between consecutive nonzero terms stay below some q < 1
// over a trailing window, the tail is bounded by last_term * q / (1 - q)
// (counting a term at every subsequent step, which is conservative for
// series with periodic zero terms).

#include <cmath>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "tms/transfer.hpp"

namespace tms {

struct GreenOptions {
  double tol = 1e-9;          // stop once the tail bound drops below this
  int n_cap = 4000;           // term budget
  int ratio_window = 6;       // nonzero-term ratios required for a certificate
  bool relative = false;      // interpret tol relative to the partial sum
  double divergence_sum = 1e12;  // partial sum that confirms divergence ...
  int divergence_window = 16;    // ... once this many ratios >= 1 in a row
  int zero_run_cap = 64;      // consecutive zero terms that end the series
};

struct GreenValue {
  double partial = 0.0;     // certified lower bound of the sum
  double tail_bound = 0.0;  // certified bound on the truncated tail
  int n_terms = 0;          // number of terms consumed (last index + 1)
  double ratio = 0.0;       // certified per-step geometric rate q
  std::vector<double> window;  // trailing per-step ratios backing the certificate

  double lo() const { return partial; }
  double hi() const { return partial + tail_bound; }
  double mid() const { return partial + 0.5 * tail_bound; }
};

// Incremental certifier shared by every series of this shape (Green sums,
// first-passage sums).  Feed nonnegative terms in order; a GreenValue comes
// back once the certificate fires.  Throws DivergingError / BudgetExhausted
// per the options.
class SeriesCertifier {
 public:
  explicit SeriesCertifier(GreenOptions opt) : opt_(opt) {}

  std::optional<GreenValue> feed(double t) {
    int n = n_++;
    if (n >= opt_.n_cap)
      throw BudgetExhaustedError("series reached the term budget without a certificate",
                                 partial_, n);
    if (!std::isfinite(t) || t < 0.0)
      throw DivergingError("series term overflowed at n=" + std::to_string(n), partial_, n);
    partial_ += t;
    if (t > 0.0) {
      if (last_index_ >= 0) {
        double rate = std::pow(t / last_nonzero_, 1.0 / (n - last_index_));
        ratios_.push_back(rate);
        if (static_cast<int>(ratios_.size()) > opt_.ratio_window) ratios_.pop_front();
        ge_one_run_ = rate >= 1.0 ? ge_one_run_ + 1 : 0;
        if (ge_one_run_ >= opt_.divergence_window && partial_ > opt_.divergence_sum)
          throw DivergingError("series ratios >= 1 sustained", partial_, n + 1);
      }
      last_nonzero_ = t;
      last_index_ = n;
      zero_run_ = 0;
    } else if (last_index_ >= 0) {
      // A long stretch of exact zeros after the series has produced terms
      // means the support is exhausted (finitely many backward paths reach
      // the cylinders); the partial sum is then the whole series.
      if (++zero_run_ >= opt_.zero_run_cap) return result(0.0, 0.0, n + 1);
    }
    if (static_cast<int>(ratios_.size()) == opt_.ratio_window) {
      double q = 0.0;
      for (double r : ratios_) q = std::max(q, r);
      if (q < 1.0) {
        double tail = last_nonzero_ * q / (1.0 - q);
        double target = opt_.relative ? opt_.tol * std::max(partial_, 1e-300) : opt_.tol;
        if (tail <= target) return result(tail, q, n + 1);
      }
    }
    return std::nullopt;
  }

  double partial() const { return partial_; }
  int terms() const { return n_; }

 private:
  GreenValue result(double tail, double q, int n_terms) const {
    GreenValue out;
    out.partial = partial_;
    out.tail_bound = tail;
    out.n_terms = n_terms;
    out.ratio = q;
    out.window.assign(ratios_.begin(), ratios_.end());
    return out;
  }

  GreenOptions opt_;
  double partial_ = 0.0;
  double last_nonzero_ = 0.0;
  int last_index_ = -1;
  int zero_run_ = 0;
  int ge_one_run_ = 0;
  int n_ = 0;
  std::deque<double> ratios_;
};

// Evaluates the series for a nonnegative simple function.  Throws
// DivergingError when ratios stay >= 1 across a full window (and keep
// growing past the divergence threshold), BudgetExhaustedError when n_cap
// terms yield no certificate.
inline GreenValue green(const SimpleFunction& f, const TailPoint& x, double lambda,
                        const System& sys, const GreenOptions& opt = {}) {
  if (!(lambda > 0)) throw InadmissibleError("lambda must be positive");
  if (!f.nonnegative())
    throw InadmissibleError("green needs a nonnegative combination of cylinders");
  SeriesCertifier cert(opt);
  const double log_lambda = std::log(lambda);
  for (int n = 0;; ++n) {
    double t = eval_Ln(f, x, n, sys) * std::exp(-log_lambda * n);
    if (auto done = cert.feed(t)) return *done;
  }
}

struct KernelEntry {
  double value = 0.0;  // point estimate (ratio of partial sums)
  double lo = 0.0;     // certified interval
  double hi = 0.0;

  double half_width() const { return 0.5 * (hi - lo); }
};

// Martin kernel K(f, x | lambda) = G(f, x) / G(1_[o], x) with the certified
// interval propagated through the quotient.  The origin entry is exactly 1.
inline KernelEntry martin_kernel(const SimpleFunction& f, const TailPoint& x,
                                 double lambda, State origin, const System& sys,
                                 const GreenOptions& opt = {}) {
  if (f.terms.size() == 1 && f.terms[0].first == 1.0 && f.terms[0].second == Word{origin})
    return {1.0, 1.0, 1.0};
  GreenValue den = green(SimpleFunction::indicator(Word{origin}), x, lambda, sys, opt);
  GreenValue num = green(f, x, lambda, sys, opt);
  if (!(den.partial > 0.0))
    throw InadmissibleError("Martin kernel denominator vanishes at this point");
  KernelEntry out;
  out.value = num.partial / den.partial;
  out.lo = num.lo() / den.hi();
  out.hi = num.hi() / den.lo();
  return out;
}

}  // namespace tms
