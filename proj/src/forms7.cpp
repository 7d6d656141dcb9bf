#include "calib7/forms7.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <thread>

#include "calib7/rng.hpp"

namespace calib7 {

namespace {

// Sorts idx in place, returns the permutation sign, or 0 on a repeated index.
int sort_sign(Form::Index& idx) {
  int sign = 1;
  for (size_t i = 1; i < idx.size(); ++i) {
    for (size_t j = i; j > 0 && idx[j - 1] >= idx[j]; --j) {
      if (idx[j - 1] == idx[j]) return 0;
      std::swap(idx[j - 1], idx[j]);
      sign = -sign;
    }
  }
  return sign;
}

void check_index_range(const Form::Index& idx) {
  for (int k : idx) {
    if (k < 1 || k > 7) throw std::invalid_argument("form index out of range 1..7");
  }
}

}  // namespace

Form::Form(int grade) : grade_(grade) {
  if (grade < 0 || grade > 7) throw std::invalid_argument("form grade must be in 0..7");
}

Form Form::monomial(const Index& idx, double c) {
  Form f(static_cast<int>(idx.size()));
  f.add_term(idx, c);
  return f;
}

double Form::coeff(const Index& idx) const {
  Index k = idx;
  check_index_range(k);
  int s = sort_sign(k);
  if (s == 0) return 0.0;
  auto it = coeffs_.find(k);
  return it == coeffs_.end() ? 0.0 : s * it->second;
}

void Form::add_term(Index idx, double c) {
  if (static_cast<int>(idx.size()) != grade_)
    throw std::invalid_argument("term arity does not match form grade");
  check_index_range(idx);
  int s = sort_sign(idx);
  if (s == 0) return;
  coeffs_[idx] += s * c;
  if (std::abs(coeffs_[idx]) <= 1e-15) coeffs_.erase(idx);
}

bool Form::is_zero(double tol) const {
  for (const auto& [k, c] : coeffs_)
    if (std::abs(c) > tol) return false;
  return true;
}

double Form::max_abs_coeff() const {
  double m = 0.0;
  for (const auto& [k, c] : coeffs_) m = std::max(m, std::abs(c));
  return m;
}

void Form::prune() {
  for (auto it = coeffs_.begin(); it != coeffs_.end();)
    it = std::abs(it->second) <= 1e-15 ? coeffs_.erase(it) : std::next(it);
}

Form Form::operator+(const Form& o) const {
  if (grade_ != o.grade_) throw std::invalid_argument("grade mismatch in form sum");
  Form r = *this;
  for (const auto& [k, c] : o.coeffs_) r.coeffs_[k] += c;
  r.prune();
  return r;
}

Form Form::operator-(const Form& o) const { return *this + o * (-1.0); }

Form Form::operator*(double s) const {
  Form r = *this;
  for (auto& [k, c] : r.coeffs_) c *= s;
  r.prune();
  return r;
}

Form wedge(const Form& a, const Form& b) {
  if (a.grade() + b.grade() > 7)
    throw std::invalid_argument("wedge grade overflow: grades sum above 7");
  Form r(a.grade() + b.grade());
  for (const auto& [ia, ca] : a.coeffs()) {
    for (const auto& [ib, cb] : b.coeffs()) {
      Form::Index merged = ia;
      merged.insert(merged.end(), ib.begin(), ib.end());
      r.add_term(std::move(merged), ca * cb);
    }
  }
  return r;
}

Form hodge_star(const Form& a) {
  Form r(7 - a.grade());
  for (const auto& [idx, c] : a.coeffs()) {
    Form::Index comp;
    comp.reserve(7 - idx.size());
    for (int k = 1; k <= 7; ++k)
      if (!std::binary_search(idx.begin(), idx.end(), k)) comp.push_back(k);
    // sign of the permutation (idx, comp) relative to (1..7); idx and comp
    // are each increasing, so inversions only occur across the two blocks.
    int inversions = 0;
    for (int i : idx)
      for (int j : comp)
        if (i > j) ++inversions;
    r.add_term(comp, (inversions % 2 == 0 ? 1.0 : -1.0) * c);
  }
  return r;
}

double evaluate(const Form& a, std::span<const Vec7> vs) {
  if (static_cast<int>(vs.size()) != a.grade())
    throw std::invalid_argument("evaluate: number of vectors must equal the form grade");
  const int p = a.grade();
  if (p == 0) return a.coeff({});
  double total = 0.0;
  Eigen::MatrixXd minor(p, p);
  for (const auto& [idx, c] : a.coeffs()) {
    for (int r = 0; r < p; ++r)
      for (int col = 0; col < p; ++col) minor(r, col) = vs[col](idx[r] - 1);
    total += c * minor.determinant();
  }
  return total;
}

Form interior(const Vec7& v, const Form& a) {
  if (a.grade() < 1)
    throw std::invalid_argument("interior product requires grade >= 1");
  Form r(a.grade() - 1);
  for (const auto& [idx, c] : a.coeffs()) {
    for (size_t pos = 0; pos < idx.size(); ++pos) {
      double comp = v(idx[pos] - 1);
      if (comp == 0.0) continue;
      Form::Index rest;
      rest.reserve(idx.size() - 1);
      for (size_t q = 0; q < idx.size(); ++q)
        if (q != pos) rest.push_back(idx[q]);
      r.add_term(std::move(rest), (pos % 2 == 0 ? 1.0 : -1.0) * comp * c);
    }
  }
  return r;
}

const Form& phi3() {
  static const Form f = [] {
    Form phi(3);
    phi.add_term({5, 6, 7}, 1.0);
    phi.add_term({5, 1, 2}, -1.0);
    phi.add_term({5, 3, 4}, -1.0);
    phi.add_term({6, 1, 3}, -1.0);
    phi.add_term({6, 4, 2}, -1.0);
    phi.add_term({7, 1, 4}, -1.0);
    phi.add_term({7, 2, 3}, -1.0);
    return phi;
  }();
  return f;
}

const Form& star_phi() {
  static const Form f = hodge_star(phi3());
  return f;
}

const Form& volume7() {
  static const Form f = Form::monomial({1, 2, 3, 4, 5, 6, 7});
  return f;
}

double phi_eval(const Vec7& x, const Vec7& y, const Vec7& z) {
  const Vec7 vs[3] = {x, y, z};
  return evaluate(phi3(), vs);
}

double star_phi_eval(const Vec7& a, const Vec7& b, const Vec7& c, const Vec7& d) {
  const Vec7 vs[4] = {a, b, c, d};
  return evaluate(star_phi(), vs);
}

Vec7 cross(const Vec7& x, const Vec7& y) {
  // <cross(x,y), z> = phi(x,y,z); expand phi termwise.
  Vec7 r = Vec7::Zero();
  for (const auto& [idx, c] : phi3().coeffs()) {
    const int i = idx[0] - 1, j = idx[1] - 1, k = idx[2] - 1;
    r(k) += c * (x(i) * y(j) - x(j) * y(i));
    r(i) += c * (x(j) * y(k) - x(k) * y(j));
    r(j) += c * (x(k) * y(i) - x(i) * y(k));
  }
  return r;
}

namespace {

int thread_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("CALIB7_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

// One orthonormal p-tuple from the per-index stream; returns false if the
// redraw cap is hit (nearly dependent Gaussian draws).
bool draw_frame(CounterRng& rng, int p, Eigen::Matrix<double, 7, Eigen::Dynamic>& q) {
  for (int redraw = 0; redraw < 16; ++redraw) {
    bool ok = true;
    for (int c = 0; c < p && ok; ++c) {
      Vec7 v;
      for (int r = 0; r < 7; ++r) v(r) = rng.next_gaussian();
      for (int prev = 0; prev < c; ++prev) v -= q.col(prev).dot(v) * q.col(prev);
      double n = v.norm();
      if (n < 1e-8) {
        ok = false;
        break;
      }
      q.col(c) = v / n;
    }
    if (ok) return true;
  }
  return false;
}

double form_value(const Form& form, const Eigen::Matrix<double, 7, Eigen::Dynamic>& q) {
  std::vector<Vec7> vs(q.cols());
  for (int c = 0; c < q.cols(); ++c) vs[c] = q.col(c);
  return evaluate(form, vs);
}

// Riemannian gradient ascent on the Stiefel manifold V_p(R^7).
double polish_max(const Form& form, Eigen::Matrix<double, 7, Eigen::Dynamic>& q,
                  int iterations) {
  const int p = static_cast<int>(q.cols());
  double val = form_value(form, q);
  double step = 0.1;
  std::vector<Vec7> vs(p);
  for (int it = 0; it < iterations; ++it) {
    for (int c = 0; c < p; ++c) vs[c] = q.col(c);
    Eigen::Matrix<double, 7, Eigen::Dynamic> grad(7, p);
    for (int c = 0; c < p; ++c) {
      for (int a = 0; a < 7; ++a) {
        std::vector<Vec7> probe = vs;
        probe[c] = Vec7::Unit(a);
        grad(a, c) = evaluate(form, probe);
      }
    }
    Eigen::MatrixXd qtg = q.transpose() * grad;
    Eigen::Matrix<double, 7, Eigen::Dynamic> tangent =
        grad - q * (0.5 * (qtg + qtg.transpose()));
    Eigen::Matrix<double, 7, Eigen::Dynamic> trial = q + step * tangent;
    // re-orthonormalize (Gram-Schmidt keeps orientation)
    for (int c = 0; c < p; ++c) {
      for (int prev = 0; prev < c; ++prev)
        trial.col(c) -= trial.col(prev).dot(trial.col(c)) * trial.col(prev);
      trial.col(c).normalize();
    }
    double trial_val = form_value(form, trial);
    if (trial_val > val) {
      q = trial;
      val = trial_val;
      step = std::min(step * 1.5, 0.5);
    } else {
      step *= 0.5;
      if (step < 1e-14) break;
    }
  }
  return val;
}

}  // namespace

Report comass_sample(const Form& form, long n, std::uint64_t seed,
                     const ComassOptions& opts) {
  if (n < 1) throw std::invalid_argument("comass_sample requires n >= 1");
  const int p = form.grade();
  const int nthreads = thread_count(opts.threads);

  struct Partial {
    double max = -1e300;
    long best_index = -1;
    long violations = 0;
    long degenerate = 0;
  };
  std::vector<Partial> partials(nthreads);

  auto work = [&](int tid) {
    Partial& part = partials[tid];
    Eigen::Matrix<double, 7, Eigen::Dynamic> q(7, p);
    for (long i = tid; i < n; i += nthreads) {
      CounterRng rng(seed, static_cast<std::uint64_t>(i));
      if (!draw_frame(rng, p, q)) {
        ++part.degenerate;
        continue;
      }
      double v = form_value(form, q);
      if (v > part.max) {
        part.max = v;
        part.best_index = i;
      }
      if (v > 1.0 + opts.tol) ++part.violations;
    }
  };
  if (nthreads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }

  Partial total;
  for (const auto& part : partials) {
    total.violations += part.violations;
    total.degenerate += part.degenerate;
    if (part.max > total.max ||
        (part.max == total.max && part.best_index < total.best_index)) {
      total.max = part.max;
      total.best_index = part.best_index;
    }
  }

  Report rep;
  rep.check = "comass_sample";
  rep.tolerance = opts.tol;
  rep.set("max_sample", total.max);
  rep.stats["violations"] = total.violations;
  rep.stats["degenerate_redraw_failures"] = total.degenerate;
  rep.provenance = {{"n", n}, {"seed", seed}, {"grade", p}, {"threads", nthreads}};
  rep.pass = total.violations == 0;

  if (opts.polish && total.best_index >= 0) {
    Eigen::Matrix<double, 7, Eigen::Dynamic> q(7, p);
    CounterRng rng(seed, static_cast<std::uint64_t>(total.best_index));
    draw_frame(rng, p, q);
    double polished = polish_max(form, q, opts.polish_iterations);
    rep.set("max_polished", polished);
    auto frame = nlohmann::json::array();
    for (int c = 0; c < p; ++c) {
      auto col = nlohmann::json::array();
      for (int r = 0; r < 7; ++r) col.push_back(q(r, c));
      frame.push_back(col);
    }
    rep.stats["argmax_frame"] = frame;
    if (p == 4) {
      // at a comass maximizer of *phi the spanning 4-plane annihilates phi
      double worst = 0.0;
      for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b)
          for (int c = b + 1; c < 4; ++c)
            worst = std::max(worst, std::abs(phi_eval(q.col(a), q.col(b), q.col(c))));
      rep.set("argmax_phi_restriction", worst);
    } else if (p == 3) {
      // at a maximizer of phi the 3-plane is closed under the cross product
      Vec7 c12 = cross(q.col(0), q.col(1));
      double off = (c12 - c12.dot(q.col(0)) * q.col(0) - c12.dot(q.col(1)) * q.col(1) -
                    c12.dot(q.col(2)) * q.col(2))
                       .norm();
      rep.set("argmax_cross_closure", off);
    }
  }
  return rep;
}

}  // namespace calib7
