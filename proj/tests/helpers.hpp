#pragma once

#include <civr/civr.hpp>

#include <memory>

namespace civr::test {

using Vec = Vector<double>;
using Mat = Matrix<double>;

inline Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Index>(v.size()));
  Index k = 0;
  for (double x : v) out(k++) = x;
  return out;
}

/// g_i(x) = c_i x^2 (d = p = 1); the mean of c_i is what the composite sees.
template <typename Scalar>
class ScaledSquareOracle final : public ComponentOracle<Scalar> {
 public:
  explicit ScaledSquareOracle(std::vector<Scalar> c) : c_(std::move(c)) {}
  Index dim_d() const override { return 1; }
  Index dim_p() const override { return 1; }
  OracleMode mode() const override { return OracleMode::FiniteSum; }
  Index num_components() const override { return static_cast<Index>(c_.size()); }
  void eval_component(Draw draw, const Vector<Scalar>& x, Vector<Scalar>& value,
                      Matrix<Scalar>& jacobian) const override {
    const Scalar c = c_.at(draw);
    value = Vector<Scalar>::Constant(1, c * x(0) * x(0));
    jacobian = Matrix<Scalar>::Constant(1, 1, 2 * c * x(0));
  }

 private:
  std::vector<Scalar> c_;
};

/// Expectation-mode oracle whose every draw returns A x - b.
class DeterministicAffineOracle final : public ComponentOracle<double> {
 public:
  DeterministicAffineOracle(Mat a, Vec b) : a_(std::move(a)), b_(std::move(b)) {}
  Index dim_d() const override { return a_.cols(); }
  Index dim_p() const override { return a_.rows(); }
  OracleMode mode() const override { return OracleMode::Expectation; }
  bool has_exact_mean() const override { return true; }
  SampleCount full_cost() const override { return 0; }
  void eval_component(Draw, const Vec& x, Vec& value, Mat& jacobian) const override {
    value = a_ * x - b_;
    jacobian = a_;
  }
  void eval_full(const Vec& x, Vec& value, Mat& jacobian) const override {
    eval_component(0, x, value, jacobian);
  }

 private:
  Mat a_;
  Vec b_;
};

template <typename Scalar>
SyntheticSpec<Scalar> make_spec(Index d, Index p, Index n = 16) {
  SyntheticSpec<Scalar> s;
  s.d = d;
  s.p = p;
  s.n = n;
  return s;
}

inline CompositeProblem<double> square_problem(std::vector<double> c) {
  return {std::make_shared<ScaledSquareOracle<double>>(std::move(c)),
          std::make_shared<SquaredNormOuter<double>>(1)};
}

inline TraceOptions<double> quiet_trace() {
  TraceOptions<double> o;
  o.wallclock = false;
  return o;
}

}  // namespace civr::test
