#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cuspgrowth/cusp_geometry.hpp"
#include "cuspgrowth/growth.hpp"

namespace cuspgrowth {

// Integer 2x2 matrix; PSL(2,Z) elements are compared after fixing the sign.
struct Mat2 {
  std::int64_t a = 1, b = 0, c = 0, d = 1;

  Mat2 operator*(const Mat2& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
  }
  Mat2 canonical() const;
  bool operator==(const Mat2& o) const = default;
  // a^2 + b^2 + c^2 + d^2 = 2 cosh d(i, g i).
  double frobenius2() const;
};

Mat2 p_power(std::int64_t l);  // z -> z + 2l
Mat2 q_power(std::int64_t m);  // z -> z / (2mz + 1)

// Reduced word p^{l1} q^{m1} ... p^{lk} q^{mk} in the free group <p, q> (Gamma(2)).
// Stored as the even-length exponent list (l1, m1, ..., lk, mk); only l1 and mk may be 0.
class GroupWord {
 public:
  GroupWord() = default;
  // Merges adjacent syllables and drops internal zero exponents.
  explicit GroupWord(std::vector<std::int64_t> exponents);
  // Letters p, P (= p^-1), q, Q (= q^-1); free reduction is applied.
  static GroupWord from_letters(const std::string& letters);

  const std::vector<std::int64_t>& exponents() const { return exponents_; }
  std::string letters() const;
  std::int64_t length() const;  // generator length sum |l_i| + |m_i|
  bool is_identity() const { return exponents_.empty(); }
  Mat2 matrix() const;
  GroupWord inverse() const;
  GroupWord operator*(const GroupWord& o) const;
  bool operator==(const GroupWord& o) const = default;

 private:
  std::vector<std::int64_t> exponents_;
};

// Q_1 p^{l_1} Q_2 ... p^{l_r} Q_{r+1}; every p-exponent inside a block has |l| < N.
struct SyllableDecomposition {
  std::vector<GroupWord> blocks;
  std::vector<std::int64_t> large_powers;
  std::int64_t threshold = 2;

  GroupWord concatenate() const;
  bool in_Q() const { return large_powers.empty(); }
};

SyllableDecomposition decompose(const GroupWord& word, std::int64_t N);

// Letters 0..3 = p, P, q, Q. Visitor receives (matrix, length, first letter).
using WordVisitor = std::function<void(const Mat2&, int, int)>;

// Depth-first walk over all reduced words of length <= L whose first letter is `first`
// (the identity is not visited).
void enumerate_shard(int L, int first, const WordVisitor& visit);
// All reduced words of length <= L, identity first. Count 1 + 2 (3^L - 1).
std::vector<GroupWord> enumerate_words(int L);
std::uint64_t word_count(int L);

double displacement(const Mat2& m, double alpha);
double displacement(const GroupWord& w, double alpha);

// Sums over the words of length exactly m (annulus m) and the running total.
struct PoincareSeries {
  double s = 0.0;
  int L = 0;
  double alpha = 1.0;
  double value = 0.0;
  std::vector<double> annulus;  // annulus[m], m = 0..L
  std::vector<std::uint64_t> counts;
  std::uint64_t words_enumerated = 0;
};

// The map z -> -conj(z) and z -> -1/z fix i and permute {p, P, q, Q} transitively, so
// only the p-shard is walked and its sums are multiplied by 4.
PoincareSeries partial_poincare(double s, int L, double alpha, unsigned threads = 1);

// Orbit counting table v(R) = #{words of length <= L : displacement <= R}.
CountingTable orbit_counting(int L, double alpha, const std::vector<double>& R_grid,
                             unsigned threads = 1);

struct DeltaEstimate {
  GrowthEstimate growth;
  CountingTable table;
  std::uint64_t words_enumerated = 0;
};
// Window [lo, hi] is given for alpha = 1 and scaled by 1/alpha.
DeltaEstimate estimate_delta(int L_max, double alpha, double lo = 8.0, double hi = 12.0,
                             unsigned threads = 1);

struct CertificateOptions {
  double d_const = 4.0;
  double A_bound = 0.0;
  double A_floor = 0.0;  // partial Poincare sum the bound must dominate
  long head_terms = 4096;
  int perturbation_depth = 1;
  unsigned threads = 1;
};

struct CertificateReport {
  double s = 0.0;
  long N = 0;
  double d_const = 0.0;
  double A_bound = 0.0;
  double T = 0.0;
  double T_head = 0.0;
  double T_tail = 0.0;
  double rho = 0.0;
  bool verdict = false;
  int perturbation_depth = 0;
  std::vector<std::string> assumptions;
};

// Parabolic series T(N,s) = sum_{|k| >= N} e^{-s d(o, p^k o)} with o = (0,0).
// Exact distances for N <= k <= head_terms, then rigorous upper bounds.
class ParabolicTail {
 public:
  ParabolicTail(const CuspModel& model, double s, long head_terms, unsigned threads = 1);
  double s() const { return s_; }
  long head_terms() const { return static_cast<long>(terms_.size()); }
  double distance(long k) const { return distances_.at(static_cast<std::size_t>(k - 1)); }
  // Both signs of k included.
  double T(long N) const;
  double head(long N) const;
  double tail() const { return tail_; }

 private:
  double s_;
  std::vector<double> distances_;
  std::vector<double> terms_;
  std::vector<double> suffix_;
  double tail_ = 0.0;
};

// Upper bound for sum_{k > K} e^{-s d_k}, one sign of k. Uses d_k >= 2 H_k with
// u(H_k) + ln(2 H_k) = ln k and u(t) <= beta t.
double parabolic_tail_bound(const CuspModel& model, double s, long K);

CertificateReport certificate(double s, long N, const CuspModel& model,
                              const CertificateOptions& options);
CertificateReport certificate(const ParabolicTail& tail, long N, const CertificateOptions& options);
// Smallest N in [1, N_max] with rho < 1; the report for N_max when none exists.
CertificateReport search_certificate(const ParabolicTail& tail, long N_max,
                                     const CertificateOptions& options);

nlohmann::json to_json(const CertificateReport& report);
nlohmann::json to_json(const PoincareSeries& series);
std::string annulus_csv(const PoincareSeries& series);

}  // namespace cuspgrowth
