#ifndef CALIB7_FORMS7_HPP
#define CALIB7_FORMS7_HPP

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "calib7/linalg.hpp"
#include "calib7/report.hpp"

namespace calib7 {

/// Alternating p-form on R^7 stored as sparse coefficients on strictly
/// increasing 1-based index tuples.  Coefficients below 1e-15 are dropped
/// after every operation.
class Form {
 public:
  using Index = std::vector<int>;
  using CoeffMap = std::map<Index, double>;

  explicit Form(int grade);
  static Form monomial(const Index& idx, double c = 1.0);

  int grade() const { return grade_; }
  double coeff(const Index& idx) const;
  // Adds c * dx_idx; idx may be unsorted, the sign is worked out.
  void add_term(Index idx, double c);
  const CoeffMap& coeffs() const { return coeffs_; }
  bool is_zero(double tol = 1e-15) const;
  double max_abs_coeff() const;

  Form operator+(const Form& o) const;
  Form operator-(const Form& o) const;
  Form operator*(double s) const;

 private:
  int grade_;
  CoeffMap coeffs_;
  void prune();
};

Form wedge(const Form& a, const Form& b);
Form hodge_star(const Form& a);
double evaluate(const Form& a, std::span<const Vec7> vs);
Form interior(const Vec7& v, const Form& a);

/// The associative 3-form phi of the flat G2 structure and derived objects.
const Form& phi3();
const Form& star_phi();   // *phi, grade 4
const Form& volume7();    // dx1 ^ ... ^ dx7
double phi_eval(const Vec7& x, const Vec7& y, const Vec7& z);
double star_phi_eval(const Vec7& a, const Vec7& b, const Vec7& c, const Vec7& d);

/// Seven-dimensional cross product, metric-dual of phi(x, y, .).
Vec7 cross(const Vec7& x, const Vec7& y);

struct ComassOptions {
  double tol = 1e-9;          // violation threshold is 1 + tol
  bool polish = true;         // deterministic ascent from the best sample
  int polish_iterations = 300;
  int threads = 0;            // 0: use CALIB7_THREADS env or 1
};

/// Draws n random orthonormal grade(form)-tuples (Gram-Schmidt on Gaussian
/// vectors, counter-based stream from seed), reports the max value and the
/// count of values exceeding 1 + tol.  The optional polish step runs a
/// deterministic projected-gradient ascent from the best sampled tuple and
/// reports the refined supremum and the maximizing frame.
Report comass_sample(const Form& form, long n, std::uint64_t seed,
                     const ComassOptions& opts = {});

}  // namespace calib7

#endif
