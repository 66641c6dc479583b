#include "cuspgrowth/lattice_poincare.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cuspgrowth/errors.hpp"
#include "cuspgrowth/numerics.hpp"

namespace cuspgrowth {

// --- matrices and words ------------------------------------------------------------

Mat2 Mat2::canonical() const {
  const bool flip = a < 0 || (a == 0 && (b < 0 || (b == 0 && c < 0)));
  return flip ? Mat2{-a, -b, -c, -d} : *this;
}

double Mat2::frobenius2() const {
  auto sq = [](std::int64_t x) { return static_cast<double>(x) * static_cast<double>(x); };
  return sq(a) + sq(b) + sq(c) + sq(d);
}

Mat2 p_power(std::int64_t l) { return {1, 2 * l, 0, 1}; }
Mat2 q_power(std::int64_t m) { return {1, 0, 2 * m, 1}; }

GroupWord::GroupWord(std::vector<std::int64_t> exponents) {
  if (exponents.size() % 2 != 0) exponents.push_back(0);
  // Syllable i belongs to p when i is even. Merge across internal zeros.
  std::vector<std::pair<int, std::int64_t>> syl;
  for (std::size_t i = 0; i < exponents.size(); ++i) {
    if (exponents[i] == 0) continue;
    const int gen = static_cast<int>(i % 2);
    if (!syl.empty() && syl.back().first == gen) {
      syl.back().second += exponents[i];
      if (syl.back().second == 0) syl.pop_back();
    } else {
      syl.push_back({gen, exponents[i]});
    }
  }
  for (const auto& [gen, e] : syl) {
    if (exponents_.size() % 2 != static_cast<std::size_t>(gen)) exponents_.push_back(0);
    exponents_.push_back(e);
  }
  if (exponents_.size() % 2 != 0) exponents_.push_back(0);
}

GroupWord GroupWord::from_letters(const std::string& letters) {
  std::vector<std::int64_t> ex;
  for (char ch : letters) {
    int gen;
    std::int64_t step;
    switch (ch) {
      case 'p': gen = 0; step = 1; break;
      case 'P': gen = 0; step = -1; break;
      case 'q': gen = 1; step = 1; break;
      case 'Q': gen = 1; step = -1; break;
      default: throw ConstraintError(std::string("GroupWord: unknown letter '") + ch + "'");
    }
    if (ex.size() % 2 != static_cast<std::size_t>(gen)) ex.push_back(0);
    ex.push_back(step);
  }
  return GroupWord(std::move(ex));
}

std::string GroupWord::letters() const {
  std::string out;
  for (std::size_t i = 0; i < exponents_.size(); ++i) {
    const std::int64_t e = exponents_[i];
    const char ch = i % 2 == 0 ? (e > 0 ? 'p' : 'P') : (e > 0 ? 'q' : 'Q');
    out.append(static_cast<std::size_t>(e < 0 ? -e : e), ch);
  }
  return out;
}

std::int64_t GroupWord::length() const {
  std::int64_t n = 0;
  for (auto e : exponents_) n += e < 0 ? -e : e;
  return n;
}

Mat2 GroupWord::matrix() const {
  Mat2 m;
  for (std::size_t i = 0; i < exponents_.size(); ++i)
    m = m * (i % 2 == 0 ? p_power(exponents_[i]) : q_power(exponents_[i]));
  return m;
}

GroupWord GroupWord::inverse() const {
  std::vector<std::int64_t> ex{0};
  for (auto it = exponents_.rbegin(); it != exponents_.rend(); ++it) ex.push_back(-*it);
  return GroupWord(std::move(ex));
}

GroupWord GroupWord::operator*(const GroupWord& o) const {
  std::vector<std::int64_t> ex = exponents_;
  ex.insert(ex.end(), o.exponents_.begin(), o.exponents_.end());
  return GroupWord(std::move(ex));
}

GroupWord SyllableDecomposition::concatenate() const {
  GroupWord out = blocks.empty() ? GroupWord() : blocks.front();
  for (std::size_t i = 0; i < large_powers.size(); ++i) {
    out = out * GroupWord({large_powers[i], 0});
    if (i + 1 < blocks.size()) out = out * blocks[i + 1];
  }
  return out;
}

SyllableDecomposition decompose(const GroupWord& word, std::int64_t N) {
  if (N < 2) throw ConstraintError("decompose: threshold N must be >= 2");
  SyllableDecomposition out;
  out.threshold = N;
  std::vector<std::int64_t> current;
  const auto& ex = word.exponents();
  for (std::size_t i = 0; i < ex.size(); ++i) {
    const std::int64_t e = ex[i];
    if (i % 2 == 0 && (e >= N || e <= -N)) {
      out.blocks.push_back(GroupWord(current));
      out.large_powers.push_back(e);
      current.assign(1, 0);  // next block starts with a q-syllable
    } else {
      current.push_back(e);
    }
  }
  out.blocks.push_back(GroupWord(current));
  return out;
}

// --- enumeration -------------------------------------------------------------------

namespace {

const Mat2 kLetter[4] = {p_power(1), p_power(-1), q_power(1), q_power(-1)};

template <class Visit>
void walk(const Mat2& m, int len, int last, int first, int L, Visit& visit) {
  visit(m, len, first);
  if (len >= L) return;
  for (int x = 0; x < 4; ++x) {
    if (x == (last ^ 1)) continue;
    walk(m * kLetter[x], len + 1, x, first, L, visit);
  }
}

// Reduced words of length exactly `depth` starting with `first`.
void prefixes(const Mat2& m, int len, int last, int depth, std::vector<std::pair<Mat2, int>>& out) {
  if (len == depth) {
    out.push_back({m, last});
    return;
  }
  for (int x = 0; x < 4; ++x) {
    if (x == (last ^ 1)) continue;
    prefixes(m * kLetter[x], len + 1, x, depth, out);
  }
}

// Runs visit over the p-shard, split into independent prefix tasks. visit(task, m, len).
template <class Visit>
void p_shard_tasks(int L, unsigned threads, std::size_t& n_tasks, Visit visit,
                   std::function<void(std::size_t)> begin_task = nullptr) {
  const int depth = std::min(L, 3);
  std::vector<std::pair<Mat2, int>> roots;
  prefixes(kLetter[0], 1, 0, depth, roots);
  n_tasks = roots.size() + 1;
  if (begin_task) for (std::size_t t = 0; t < n_tasks; ++t) begin_task(t);
  // Task 0: words shorter than the prefix depth.
  parallel_for(n_tasks, threads, [&](std::size_t task) {
    if (task == 0) {
      auto v = [&](const Mat2& m, int len, int) { if (len < depth) visit(task, m, len); };
      walk(kLetter[0], 1, 0, 0, depth - 1 < 1 ? 0 : depth - 1, v);
      return;
    }
    const auto& [m0, last] = roots[task - 1];
    auto v = [&](const Mat2& m, int len, int) { visit(task, m, len); };
    walk(m0, depth, last, 0, L, v);
  });
}

}  // namespace

void enumerate_shard(int L, int first, const WordVisitor& visit) {
  if (L < 1) return;
  if (first < 0 || first > 3) throw ConstraintError("enumerate_shard: letter must be 0..3");
  auto v = [&](const Mat2& m, int len, int f) { visit(m, len, f); };
  walk(kLetter[first], 1, first, first, L, v);
}

std::vector<GroupWord> enumerate_words(int L) {
  if (L < 0) throw ConstraintError("enumerate_words: L must be >= 0");
  std::vector<GroupWord> out{GroupWord()};
  static const char kChar[4] = {'p', 'P', 'q', 'Q'};
  std::string buf;
  std::function<void(int)> rec = [&](int last) {
    out.push_back(GroupWord::from_letters(buf));
    if (static_cast<int>(buf.size()) == L) return;
    for (int x = 0; x < 4; ++x) {
      if (x == (last ^ 1)) continue;
      buf.push_back(kChar[x]);
      rec(x);
      buf.pop_back();
    }
  };
  if (L >= 1)
    for (int x = 0; x < 4; ++x) {
      buf.assign(1, kChar[x]);
      rec(x);
    }
  return out;
}

std::uint64_t word_count(int L) {
  std::uint64_t pow3 = 1;
  for (int i = 0; i < L; ++i) pow3 *= 3;
  return 1 + 2 * (pow3 - 1);
}

double displacement(const Mat2& m, double alpha) {
  const double x = 0.5 * m.frobenius2();
  if (!(x >= 1.0)) throw NumericalError("displacement: matrix is not in SL(2,Z)");
  return std::acosh(x) / alpha;
}

double displacement(const GroupWord& w, double alpha) { return displacement(w.matrix(), alpha); }

// --- Poincare series and counting --------------------------------------------------

PoincareSeries partial_poincare(double s, int L, double alpha, unsigned threads) {
  if (!(s > 0.0)) throw ConstraintError("partial_poincare: s must be positive");
  if (L < 0) throw ConstraintError("partial_poincare: L must be >= 0");
  if (!(alpha > 0.0)) throw ConstraintError("partial_poincare: alpha must be positive");
  PoincareSeries out;
  out.s = s;
  out.L = L;
  out.alpha = alpha;
  out.annulus.assign(static_cast<std::size_t>(L) + 1, 0.0);
  out.counts.assign(static_cast<std::size_t>(L) + 1, 0);
  out.annulus[0] = 1.0;
  out.counts[0] = 1;
  out.words_enumerated = 1;
  if (L >= 1) {
    std::size_t n_tasks = 0;
    std::vector<std::vector<CompensatedSum>> sums;
    std::vector<std::vector<std::uint64_t>> counts;
    p_shard_tasks(
        L, threads, n_tasks,
        [&](std::size_t task, const Mat2& m, int len) {
          sums[task][static_cast<std::size_t>(len)].add(std::exp(-s * displacement(m, alpha)));
          ++counts[task][static_cast<std::size_t>(len)];
        },
        [&](std::size_t) {
          sums.emplace_back(static_cast<std::size_t>(L) + 1);
          counts.emplace_back(static_cast<std::size_t>(L) + 1, 0);
        });
    for (int m = 1; m <= L; ++m) {
      CompensatedSum acc;
      std::uint64_t c = 0;
      for (std::size_t t = 0; t < n_tasks; ++t) {
        acc.add(sums[t][static_cast<std::size_t>(m)].value());
        c += counts[t][static_cast<std::size_t>(m)];
      }
      out.annulus[static_cast<std::size_t>(m)] = 4.0 * acc.value();
      out.counts[static_cast<std::size_t>(m)] = 4 * c;
      out.words_enumerated += c;
    }
  }
  CompensatedSum total;
  for (double a : out.annulus) total.add(a);
  out.value = total.value();
  return out;
}

CountingTable orbit_counting(int L, double alpha, const std::vector<double>& R_grid,
                             unsigned threads) {
  for (std::size_t i = 1; i < R_grid.size(); ++i)
    if (!(R_grid[i] > R_grid[i - 1])) throw ConstraintError("orbit_counting: grid must be increasing");
  const std::size_t G = R_grid.size();
  std::vector<std::vector<std::uint64_t>> bins;
  std::size_t n_tasks = 0;
  if (L >= 1)
    p_shard_tasks(
        L, threads, n_tasks,
        [&](std::size_t task, const Mat2& m, int) {
          const double d = displacement(m, alpha);
          const auto it = std::lower_bound(R_grid.begin(), R_grid.end(), d);
          ++bins[task][static_cast<std::size_t>(it - R_grid.begin())];
        },
        [&](std::size_t) { bins.emplace_back(G + 1, 0); });
  CountingTable out;
  out.kind = CountingKind::LatticeOrbit;
  out.grid = R_grid;
  out.log_values.assign(G, 0.0);
  std::uint64_t running = 1;  // identity, displacement 0
  for (std::size_t g = 0; g < G; ++g) {
    for (std::size_t t = 0; t < n_tasks; ++t) running += 4 * bins[t][g];
    out.log_values[g] = R_grid[g] >= 0.0 ? std::log(static_cast<double>(running)) : kNegInf;
  }
  return out;
}

DeltaEstimate estimate_delta(int L_max, double alpha, double lo, double hi, unsigned threads) {
  if (L_max < 6) throw ConstraintError("estimate_delta: L_max must be >= 6");
  if (!(alpha > 0.0) || !(lo > 0.0) || !(hi >= lo))
    throw ConstraintError("estimate_delta: need alpha > 0 and 0 < lo <= hi");
  std::vector<double> grid;
  const double step = 0.25;
  for (int j = 1; j * step < hi; ++j) grid.push_back(j * step / alpha);
  grid.push_back(lo / alpha);
  grid.push_back(hi / alpha);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  DeltaEstimate out;
  out.table = orbit_counting(L_max, alpha, grid, threads);
  out.growth = growth_exponents(out.table, lo / alpha, hi / alpha);
  out.words_enumerated = 1 + (word_count(L_max) - 1) / 4;
  return out;
}

// --- certificate -------------------------------------------------------------------

namespace {

// Largest height below which the profile is the pure alpha exponential from t = 0.
double alpha_floor_height(const CuspModel& model) {
  double h = model.profile().t_start();
  for (const auto& piece : model.profile().pieces()) {
    if (piece.kind != PieceKind::PureAlpha || piece.lo > h) break;
    h = piece.hi;
  }
  return h;
}

// Sum over h >= h0 of 2 (h+1) r^h, in logs.
double log_envelope(double log_r, double h0) {
  const double r = std::exp(log_r);
  const double one_minus = -std::expm1(log_r);
  return std::log(2.0) + h0 * log_r +
         std::log((h0 + 1.0) / one_minus + r / (one_minus * one_minus));
}

}  // namespace

double parabolic_tail_bound(const CuspModel& model, double s, long K) {
  if (K < 1) throw ConstraintError("parabolic_tail_bound: K must be >= 1");
  const double alpha = model.alpha();
  const double beta = model.beta();
  if (!(s > 0.5 * beta)) throw ConstraintError("certificate: s <= beta/2, tail series diverges");
  const double sigma = 2.0 * s / alpha;

  // k up to k_alpha: the geodesic apex stays in the pure alpha region and
  // e^{-s d_k} <= (alpha k)^{-sigma}.
  const double h_alpha = alpha_floor_height(model);
  const double log_k_alpha =
      std::isinf(h_alpha) ? std::numeric_limits<double>::infinity()
                          : std::log(2.0 / alpha) + alpha * h_alpha +
                                0.5 * std::log1p(-std::exp(-2.0 * alpha * h_alpha));
  const double logK = std::log(static_cast<double>(K));
  std::vector<double> logs;
  logs.push_back(-sigma * std::log(alpha) + (1.0 - sigma) * logK - std::log(sigma - 1.0));
  if (std::isinf(log_k_alpha)) return std::exp(logs.front());

  // Beyond k_alpha: any path to (k,0) either climbs to H or stays below it and pays
  // k A(H); so d_k >= 2 H_k with u(H_k) + ln(2 H_k) = ln k. Bin the k by H_k.
  const double log_k0 = std::max(logK, log_k_alpha);
  double lo = 1e-12, hi = 1.0;
  auto f = [&](double H) { return model.u(H) + std::log(2.0 * H) - log_k0; };
  while (f(hi) < 0.0) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-12 * hi; ++i) (f(0.5 * (lo + hi)) < 0.0 ? lo : hi) = 0.5 * (lo + hi);
  const double h0 = std::floor(lo);

  // The bins need u(t) <= beta t, which the construction guarantees; check it at knots.
  for (double k : model.knots(0.0, 1e300))
    if (model.u(k) > beta * k * (1.0 + 1e-12))
      throw NumericalError("parabolic_tail_bound: profile exceeds the beta envelope");

  const double log_r_beta = beta - 2.0 * s;
  const double last_start = model.profile().pieces().back().lo;
  double acc = kNegInf;
  double h = h0;
  const double log_cut = std::log(1e-18);
  for (long it = 0;; ++it, h += 1.0) {
    if (h >= last_start && model.profile().pieces().back().kind == PieceKind::PureAlpha) {
      // u = alpha t from here on.
      acc = log_add(acc, alpha + log_envelope(alpha - 2.0 * s, h));
      break;
    }
    const double env = beta + log_envelope(log_r_beta, h);
    if (it > 0 && (env < acc + log_cut || it > 20'000'000)) {
      acc = log_add(acc, env);
      break;
    }
    acc = log_add(acc, std::log(2.0 * (h + 1.0)) + model.u(h + 1.0) - 2.0 * s * h);
  }
  logs.push_back(acc);
  return std::exp(log_sum_exp(logs));
}

ParabolicTail::ParabolicTail(const CuspModel& model, double s, long head_terms, unsigned threads)
    : s_(s) {
  if (head_terms < 1) throw ConstraintError("ParabolicTail: head_terms must be >= 1");
  if (!(s > 0.5 * model.beta())) throw ConstraintError("certificate: s <= beta/2, tail series diverges");
  const auto K = static_cast<std::size_t>(head_terms);
  distances_.assign(K, 0.0);
  terms_.assign(K, 0.0);
  parallel_for(K, threads, [&](std::size_t i) {
    const double k = static_cast<double>(i + 1);
    distances_[i] = exact_distance(model, {0.0, 0.0}, {k, 0.0}, GeodesicOptions{1e-10, 400});
    terms_[i] = std::exp(-s * distances_[i]);
  });
  suffix_.assign(K + 1, 0.0);
  CompensatedSum acc;
  for (std::size_t i = K; i-- > 0;) {
    acc.add(terms_[i]);
    suffix_[i] = acc.value();
  }
  tail_ = parabolic_tail_bound(model, s, head_terms);
}

double ParabolicTail::head(long N) const {
  if (N < 1) throw ConstraintError("ParabolicTail: N must be >= 1");
  if (N > head_terms()) return 0.0;
  return 2.0 * suffix_[static_cast<std::size_t>(N - 1)];
}

double ParabolicTail::T(long N) const {
  if (N > head_terms())
    throw ConstraintError("ParabolicTail: N beyond the computed head; increase head_terms");
  return head(N) + 2.0 * tail_;
}

CertificateReport certificate(const ParabolicTail& tail, long N, const CertificateOptions& o) {
  if (!(o.d_const > 0.0)) throw ConstraintError("certificate: d_const must be positive");
  if (!(o.A_bound > 0.0) || o.A_bound < o.A_floor)
    throw ConstraintError("certificate: A_bound is not an upper bound for the partial Poincare sum");
  CertificateReport r;
  r.s = tail.s();
  r.N = N;
  r.d_const = o.d_const;
  r.A_bound = o.A_bound;
  r.T_head = tail.head(N);
  r.T_tail = 2.0 * tail.tail();
  r.T = tail.T(N);
  r.rho = std::exp(2.0 * r.s * o.d_const) * r.T * o.A_bound;
  r.verdict = r.rho < 1.0;
  r.perturbation_depth = o.perturbation_depth;
  std::ostringstream depth;
  depth << "perturbation depth n = " << o.perturbation_depth
        << " is taken as large enough relative to N";
  r.assumptions = {
      "d_const is a supplied constant bounding the detour of a cusp excursion; it is not computed",
      "A_bound dominates the Poincare series over words without large p-powers; it is checked only "
      "against the partial sum over words up to the configured length",
      "p^k distances are exact horoball-internal distances for k <= head_terms; beyond that, "
      "rigorous lower bounds on d(o, p^k o) are used",
      depth.str(),
      "a true verdict certifies delta_n(Gamma) <= s only",
  };
  return r;
}

CertificateReport certificate(double s, long N, const CuspModel& model, const CertificateOptions& o) {
  const ParabolicTail tail(model, s, std::max(o.head_terms, N), o.threads);
  return certificate(tail, N, o);
}

CertificateReport search_certificate(const ParabolicTail& tail, long N_max,
                                     const CertificateOptions& o) {
  if (N_max < 1) throw ConstraintError("search_certificate: N_max must be >= 1");
  for (long N = 1; N < N_max; ++N) {
    CertificateReport r = certificate(tail, N, o);
    if (r.verdict) return r;
  }
  return certificate(tail, N_max, o);
}

nlohmann::json to_json(const CertificateReport& r) {
  return {{"s", r.s},           {"N", r.N},         {"d_const", r.d_const},
          {"A_bound", r.A_bound}, {"T", r.T},       {"T_head", r.T_head},
          {"T_tail", r.T_tail}, {"rho", r.rho},     {"verdict", r.verdict},
          {"perturbation_depth", r.perturbation_depth}, {"assumptions", r.assumptions}};
}

nlohmann::json to_json(const PoincareSeries& p) {
  return {{"s", p.s},         {"L", p.L},         {"alpha", p.alpha},
          {"value", p.value}, {"annulus", p.annulus}, {"counts", p.counts},
          {"words_enumerated", p.words_enumerated}};
}

std::string annulus_csv(const PoincareSeries& p) {
  std::ostringstream os;
  os << std::setprecision(17) << "m,count,annulus_sum,partial_sum\n";
  CompensatedSum acc;
  for (std::size_t m = 0; m < p.annulus.size(); ++m) {
    acc.add(p.annulus[m]);
    os << m << ',' << p.counts[m] << ',' << p.annulus[m] << ',' << acc.value() << '\n';
  }
  return os.str();
}

}  // namespace cuspgrowth
