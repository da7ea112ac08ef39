#pragma once

// Mollifier kernels, their moment tensors and the admissible smoothness
// range implied by the smallest non-zero moment.

#include "besov/analytic.hpp"
#include "besov/error.hpp"
#include "besov/grid.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace besov {

struct MixtureComponent {
  double weight = 1.0;
  AnalyticKernel kernel;
};

/// Signed combination of analytic kernels.
struct MixtureKernel {
  std::vector<MixtureComponent> components;
};

/// Kernel known only through samples on its own grid.
struct SampledKernel {
  GridFunction samples;
  Interpolation interpolation = Interpolation::cubic;
};

using KernelForm = std::variant<AnalyticKernel, MixtureKernel, SampledKernel>;

inline constexpr double kMassTolerance = 1e-10;
inline constexpr int kDefaultMaxMomentOrder = 6;

/// A kernel rho with unit integral. Construction fails with
/// KernelHypothesisError when the nominal mass differs from 1 by more than
/// 1e-10 or samples are not finite.
class MollifierSpec {
 public:
  MollifierSpec(KernelForm form, std::string id, double mass_scale = 1.0)
      : form_(std::move(form)), id_(std::move(id)), mass_scale_(mass_scale) {
    if (!std::isfinite(mass_scale)) throw KernelHypothesisError("kernel mass multiplier must be finite");
    std::visit(
        [this](const auto& f) {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, AnalyticKernel>) {
            validate(f);
            dim_ = kernel_dim(f);
          } else if constexpr (std::is_same_v<T, MixtureKernel>) {
            if (f.components.empty()) throw InvalidArgument("mixture needs at least one component");
            dim_ = kernel_dim(f.components.front().kernel);
            for (const auto& c : f.components) {
              validate(c.kernel);
              if (!std::isfinite(c.weight)) throw KernelHypothesisError("mixture weight must be finite");
              if (kernel_dim(c.kernel) != dim_) throw InvalidArgument("mixture components differ in dimension");
            }
          } else {
            dim_ = f.samples.spec().dim();
          }
        },
        form_);
    double m = nominal_mass();
    if (std::abs(m - 1.0) > kMassTolerance) {
      std::ostringstream os;
      os.precision(17);
      os << "kernel '" << id_ << "' has integral " << m
         << "; mollifiers must be normalized to integral 1";
      throw KernelHypothesisError(os.str());
    }
  }

  static MollifierSpec analytic(AnalyticKernel k, std::string id) { return {KernelForm{std::move(k)}, std::move(id)}; }

  const KernelForm& form() const noexcept { return form_; }
  const std::string& id() const noexcept { return id_; }
  int dim() const noexcept { return dim_; }
  double mass_scale() const noexcept { return mass_scale_; }

  double nominal_mass() const {
    return std::visit(
        [this](const auto& f) -> double {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, AnalyticKernel>) return mass_scale_;
          else if constexpr (std::is_same_v<T, MixtureKernel>) {
            double s = 0.0;
            for (const auto& c : f.components) s += c.weight;
            return mass_scale_ * s;
          } else
            return mass_scale_ * f.samples.mass();
        },
        form_);
  }

  /// True when a closed-form Fourier symbol is available.
  bool has_symbol() const noexcept { return !std::holds_alternative<SampledKernel>(form_); }

  /// Even under reflection x -> -x (per axis), so the symbol is real and even per axis.
  bool is_even() const {
    if (const auto* a = std::get_if<AnalyticKernel>(&form_)) return besov::is_even(*a);
    if (const auto* m = std::get_if<MixtureKernel>(&form_)) {
      for (const auto& c : m->components)
        if (!besov::is_even(c.kernel)) return false;
      return true;
    }
    return false;
  }

  const SampledKernel* sampled() const noexcept { return std::get_if<SampledKernel>(&form_); }

  /// 1 - rho^(t). Only for kernels with a symbol.
  std::complex<double> symbol_defect(Point t) const {
    if (const auto* a = std::get_if<AnalyticKernel>(&form_))
      return (1.0 - mass_scale_) + mass_scale_ * besov::symbol_defect(*a, t);
    if (const auto* m = std::get_if<MixtureKernel>(&form_)) {
      std::complex<double> d(1.0 - nominal_mass(), 0.0);
      for (const auto& c : m->components) d += mass_scale_ * c.weight * besov::symbol_defect(c.kernel, t);
      return d;
    }
    throw InvalidArgument("sampled kernel '" + id_ + "' has no closed-form symbol");
  }

  /// Samples on `spec`. Sampled kernels must already live on `spec`.
  GridFunction sample(const GridSpec& spec) const { return sample(spec, 1.0); }

  /// Samples rho_eps. Analytic forms are re-evaluated at scale eps;
  /// sampled kernels go through rescale_kernel.
  GridFunction sample(const GridSpec& spec, double eps) const {
    if (const auto* s = std::get_if<SampledKernel>(&form_)) {
      if (!(s->samples.spec() == spec))
        throw InvalidArgument("sampled kernel '" + id_ + "' lives on " + s->samples.spec().describe() +
                              ", requested " + spec.describe());
      GridFunction r = rescale_kernel(s->samples, eps, s->interpolation);
      return mass_scale_ == 1.0 ? r : mass_scale_ * r;
    }
    if (const auto* a = std::get_if<AnalyticKernel>(&form_)) {
      GridFunction r = sample_analytic(*a, spec, eps);
      return mass_scale_ == 1.0 ? r : mass_scale_ * r;
    }
    const auto& mix = std::get<MixtureKernel>(form_);
    std::vector<double> acc(spec.size(), 0.0);
    for (const auto& c : mix.components) {
      GridFunction part = sample_analytic(c.kernel, spec, eps);
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += mass_scale_ * c.weight * part[i];
    }
    return {spec, std::move(acc)};
  }

  /// Bounding box of the support, per axis.
  std::vector<std::array<double, 2>> support() const {
    if (const auto* a = std::get_if<AnalyticKernel>(&form_)) return support_box(*a);
    if (const auto* m = std::get_if<MixtureKernel>(&form_)) {
      auto box = support_box(m->components.front().kernel);
      for (const auto& c : m->components) {
        auto b = support_box(c.kernel);
        for (std::size_t i = 0; i < box.size(); ++i) {
          box[i][0] = std::min(box[i][0], b[i][0]);
          box[i][1] = std::max(box[i][1], b[i][1]);
        }
      }
      return box;
    }
    const GridFunction& f = std::get<SampledKernel>(form_).samples;
    const double thr = 1e-12 * f.max_abs();
    std::vector<std::array<double, 2>> box(f.spec().dim(), {0.0, 0.0});
    bool first = true;
    for (std::size_t k = 0; k < f.size(); ++k) {
      if (std::abs(f[k]) <= thr) continue;
      Point x = f.spec().point(k);
      for (int a = 0; a < f.spec().dim(); ++a) {
        if (first) box[a] = {x[a], x[a]};
        box[a][0] = std::min(box[a][0], x[a]);
        box[a][1] = std::max(box[a][1], x[a]);
      }
      first = false;
    }
    return box;
  }

  double support_diameter() const {
    double d2 = 0.0;
    for (const auto& [lo, hi] : support()) d2 += (hi - lo) * (hi - lo);
    return std::sqrt(d2);
  }

  /// Whether rho >= 0 everywhere.
  bool nonnegative() const {
    if (mass_scale_ < 0.0) return false;
    if (const auto* m = std::get_if<MixtureKernel>(&form_)) {
      for (const auto& c : m->components)
        if (c.weight < 0.0) return false;
      return true;
    }
    if (const auto* s = std::get_if<SampledKernel>(&form_)) {
      for (double v : s->samples.values())
        if (v < 0.0) return false;
    }
    return true;
  }

 private:
  KernelForm form_;
  std::string id_;
  double mass_scale_ = 1.0;
  int dim_ = 1;
};

// ---------------------------------------------------------------------------
// Moment tensors

/// Symmetric k-tensor of moments alpha_{j1..jk} = integral y_j1...y_jk rho(y) dy,
/// stored once per sorted multi-index.
class MomentTensor {
 public:
  MomentTensor(int order, int dim) : order_(order), dim_(dim) {
    std::vector<int> idx(order, 0);
    for (;;) {
      indices_.push_back(idx);
      int pos = order - 1;
      while (pos >= 0 && idx[pos] == dim - 1) --pos;
      if (pos < 0) break;
      int v = idx[pos] + 1;
      for (int i = pos; i < order; ++i) idx[i] = v;
    }
    values_.assign(indices_.size(), 0.0);
  }

  int order() const noexcept { return order_; }
  int dim() const noexcept { return dim_; }
  const std::vector<std::vector<int>>& indices() const noexcept { return indices_; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::vector<double>& values() noexcept { return values_; }

  /// Entry for any (unsorted) multi-index.
  double at(std::vector<int> idx) const {
    if (static_cast<int>(idx.size()) != order_) throw InvalidArgument("multi-index has wrong length");
    std::sort(idx.begin(), idx.end());
    auto it = std::find(indices_.begin(), indices_.end(), idx);
    if (it == indices_.end()) throw InvalidArgument("multi-index out of range");
    return values_[static_cast<std::size_t>(it - indices_.begin())];
  }

  double max_abs() const noexcept {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  /// Per-axis exponents of a sorted multi-index.
  static std::array<int, 2> powers(const std::vector<int>& idx) {
    std::array<int, 2> p{0, 0};
    for (int j : idx) ++p[j];
    return p;
  }

 private:
  int order_;
  int dim_;
  std::vector<std::vector<int>> indices_;
  std::vector<double> values_;
};

enum class MomentMethod {
  automatic,    ///< closed form when the family has one, else quadrature
  closed_form,  ///< throws for sampled kernels
  quadrature,   ///< grid quadrature on the sampled kernel
};

namespace detail {

inline void check_moment_order(int k, int k_max) {
  if (k < 1) throw InvalidArgument("moment order must be >= 1 (the mass is fixed to 1)");
  if (k > k_max) throw InvalidArgument("moment order " + std::to_string(k) + " exceeds k_max=" + std::to_string(k_max));
}

inline double monomial(Point y, std::array<int, 2> p) {
  double v = 1.0;
  for (int a = 0; a < 2; ++a)
    for (int i = 0; i < p[a]; ++i) v *= y[a];
  return v;
}

}  // namespace detail

/// Moment tensor of order k. Quadrature runs on `spec` (sampled kernels use
/// their own grid).
inline MomentTensor moment_tensor(const MollifierSpec& rho, int k, const GridSpec& spec,
                                  MomentMethod method = MomentMethod::automatic,
                                  int k_max = kDefaultMaxMomentOrder) {
  detail::check_moment_order(k, k_max);
  MomentTensor t(k, rho.dim());
  const bool closed = method == MomentMethod::closed_form ||
                      (method == MomentMethod::automatic && rho.has_symbol());
  if (closed) {
    if (!rho.has_symbol()) throw InvalidArgument("sampled kernel '" + rho.id() + "' has no closed-form moments");
    for (std::size_t e = 0; e < t.indices().size(); ++e) {
      auto p = MomentTensor::powers(t.indices()[e]);
      double v = 0.0;
      if (const auto* a = std::get_if<AnalyticKernel>(&rho.form())) v = raw_moment(*a, p);
      else
        for (const auto& c : std::get<MixtureKernel>(rho.form()).components) v += c.weight * raw_moment(c.kernel, p);
      t.values()[e] = rho.mass_scale() * v;
    }
    return t;
  }
  const GridFunction samples = rho.sampled() ? rho.sampled()->samples : rho.sample(spec);
  const GridSpec& g = samples.spec();
  const double dv = g.cell_volume();
  for (std::size_t e = 0; e < t.indices().size(); ++e) {
    auto p = MomentTensor::powers(t.indices()[e]);
    double acc = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i)
      if (samples[i] != 0.0) acc += detail::monomial(g.point(i), p) * samples[i];
    t.values()[e] = (rho.sampled() ? rho.mass_scale() : 1.0) * acc * dv;
  }
  return t;
}

/// k0 = min{k >= 1 : moment tensor of order k is non-zero}, or infinity.
struct MomentOrder {
  bool infinite = false;
  int k = 0;

  static MomentOrder finite(int k) { return {false, k}; }
  static MomentOrder unbounded() { return {true, 0}; }
  std::string str() const { return infinite ? "inf" : std::to_string(k); }
  friend bool operator==(const MomentOrder&, const MomentOrder&) = default;
};

/// Scale-aware zero threshold for order-k moments: 1e-8 * diam(supp)^k.
inline double default_moment_tolerance(const MollifierSpec& rho, int k) {
  return 1e-8 * std::pow(rho.support_diameter(), k);
}

namespace detail {

inline GridSpec moment_grid(const MollifierSpec& rho) {
  if (rho.sampled()) return rho.sampled()->samples.spec();
  double reach = 0.0;
  for (const auto& [lo, hi] : rho.support()) reach = std::max({reach, std::abs(lo), std::abs(hi)});
  return GridSpec(rho.dim(), std::max(1.0, 2.0 * reach), rho.dim() == 1 ? 1 << 14 : 512);
}

}  // namespace detail

/// Smallest k <= k_max whose moment tensor has max-norm above the tolerance
/// (explicit `tol`, or default_moment_tolerance per order).
inline MomentOrder smallest_nonzero_moment(const MollifierSpec& rho, int k_max = kDefaultMaxMomentOrder,
                                           std::optional<double> tol = std::nullopt) {
  if (k_max < 1) throw InvalidArgument("k_max must be >= 1");
  if (tol && !(*tol > 0.0)) throw InvalidArgument("moment tolerance must be positive");
  GridSpec spec = detail::moment_grid(rho);
  for (int k = 1; k <= k_max; ++k) {
    double threshold = tol ? *tol : default_moment_tolerance(rho, k);
    if (moment_tensor(rho, k, spec, MomentMethod::automatic, k_max).max_abs() > threshold)
      return MomentOrder::finite(k);
  }
  return MomentOrder::unbounded();
}

/// Grid quadrature of integral |y|^s |rho(y)| dy.
inline double fractional_moment(const MollifierSpec& rho, double s, const GridSpec& spec) {
  if (!(s > 0.0)) throw InvalidArgument("fractional moment order must be positive");
  const GridFunction samples = rho.sampled() ? rho.sampled()->samples : rho.sample(spec);
  const GridSpec& g = samples.spec();
  double acc = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i] == 0.0) continue;
    Point y = g.point(i);
    double r = std::sqrt(y[0] * y[0] + (g.dim() == 2 ? y[1] * y[1] : 0.0));
    acc += std::pow(r, s) * std::abs(samples[i]);
  }
  return std::abs(rho.sampled() ? rho.mass_scale() : 1.0) * acc * g.cell_volume();
}

struct MomentReport {
  MomentOrder k0;
  std::vector<MomentTensor> tensors;    ///< orders 1..k_max
  std::map<double, double> fractional;  ///< s -> integral |y|^s |rho|
  std::optional<double> admissible_s_sup;  ///< k0, or nullopt for infinity
  bool nonnegative = true;
};

inline const std::vector<double>& default_fractional_orders() {
  static const std::vector<double> orders{0.25, 0.5, 0.75, 1.0, 1.5, 2.0};
  return orders;
}

inline MomentReport analyze_moments(const MollifierSpec& rho, const GridSpec& spec,
                                    int k_max = kDefaultMaxMomentOrder,
                                    const std::vector<double>& fractional_orders = default_fractional_orders()) {
  MomentReport r;
  r.k0 = smallest_nonzero_moment(rho, k_max);
  for (int k = 1; k <= k_max; ++k) r.tensors.push_back(moment_tensor(rho, k, spec, MomentMethod::automatic, k_max));
  for (double s : fractional_orders) r.fractional[s] = fractional_moment(rho, s, spec);
  if (!r.k0.infinite) r.admissible_s_sup = r.k0.k;
  r.nonnegative = rho.nonnegative();
  return r;
}

/// Predicted range (0, k0) of smoothness exponents the kernel characterizes.
struct AdmissibilityVerdict {
  double lower = 0.0;
  std::optional<double> upper;  ///< nullopt = unbounded
  bool moment_condition_below_one = false;
  std::string rationale;

  bool admits(double s) const { return s > lower && (!upper || s < *upper); }
};

inline AdmissibilityVerdict classify_admissibility(const MollifierSpec& rho, const MomentReport& report) {
  AdmissibilityVerdict v;
  v.upper = report.admissible_s_sup;
  std::ostringstream os;
  if (report.k0.infinite)
    os << "all moments up to order " << report.tensors.size()
       << " vanish; no upper limit on s detected within k_max";
  else
    os << "smallest non-zero moment has order k0=" << report.k0.k
       << "; the rate characterization holds exactly for 0 < s < " << report.k0.k;
  bool finite = !report.fractional.empty();
  for (const auto& [s, value] : report.fractional)
    if (s < 1.0 && !std::isfinite(value)) finite = false;
  v.moment_condition_below_one = finite;
  if (finite)
    os << "; fractional moments of order s < 1 are finite, which independently suffices for every 0 < s < 1";
  if (rho.nonnegative()) os << "; kernel is non-negative, so finiteness of these moments is also necessary";
  v.rationale = os.str();
  return v;
}

}  // namespace besov
