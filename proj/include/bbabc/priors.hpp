#ifndef BBABC_PRIORS_HPP
#define BBABC_PRIORS_HPP

#include <cctype>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bbabc/error.hpp"
#include "bbabc/numerics.hpp"
#include "bbabc/random.hpp"

namespace bbabc {

using ParamVector = std::vector<double>;

/// U_p(0, mu): flat with mass p on (0, mu), exponential tail beyond mu
/// carrying the remaining 1 - p and continuous at mu.
class ModifiedUniform {
 public:
  ModifiedUniform(double mu, double p) : mu_(mu), p_(p) {
    if (!(mu > 0.0) || !std::isfinite(mu)) throw ParameterError("ModifiedUniform: mu must be positive");
    if (!(p > 0.0 && p < 1.0)) throw ParameterError("ModifiedUniform: p must lie in (0, 1)");
  }

  double mu() const noexcept { return mu_; }
  double p() const noexcept { return p_; }
  /// Rate of the exponential tail.
  double tail_rate() const noexcept { return p_ / (mu_ * (1.0 - p_)); }

  double mean() const noexcept { return p_ * mu_ / 2.0 + (1.0 - p_) * (mu_ + 1.0 / tail_rate()); }
  double variance() const noexcept {
    const double tail_mean = mu_ + 1.0 / tail_rate();
    const double second = p_ * mu_ * mu_ / 3.0 +
                          (1.0 - p_) * (1.0 / (tail_rate() * tail_rate()) + tail_mean * tail_mean);
    return second - mean() * mean();
  }

  friend bool operator==(const ModifiedUniform&, const ModifiedUniform&) = default;

 private:
  double mu_;
  double p_;
};

/// Gamma(shape, scale): mean shape * scale, variance shape * scale^2.
class GammaPrior {
 public:
  GammaPrior(double shape, double scale) : shape_(shape), scale_(scale) {
    if (!(shape > 0.0) || !(scale > 0.0) || !std::isfinite(shape) || !std::isfinite(scale)) {
      throw ParameterError("GammaPrior: shape and scale must be positive");
    }
  }

  double shape() const noexcept { return shape_; }
  double scale() const noexcept { return scale_; }
  double mean() const noexcept { return shape_ * scale_; }
  double variance() const noexcept { return shape_ * scale_ * scale_; }

  friend bool operator==(const GammaPrior&, const GammaPrior&) = default;

 private:
  double shape_;
  double scale_;
};

using ComponentPrior = std::variant<ModifiedUniform, GammaPrior>;

inline double modified_uniform_pdf(const ModifiedUniform& prior, double x) noexcept {
  if (!(x > 0.0)) return 0.0;
  const double height = prior.p() / prior.mu();
  if (x <= prior.mu()) return height;
  return height * std::exp(-prior.tail_rate() * (x - prior.mu()));
}

inline double modified_uniform_log_pdf(const ModifiedUniform& prior, double x) noexcept {
  if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
  const double log_height = std::log(prior.p() / prior.mu());
  if (x <= prior.mu()) return log_height;
  return log_height - prior.tail_rate() * (x - prior.mu());
}

/// With probability p uniform on (0, mu), otherwise mu plus an exponential
/// with the tail rate. Always consumes exactly two uniforms.
inline double modified_uniform_sample(RngStream& stream, const ModifiedUniform& prior) noexcept {
  const double branch = stream.uniform();
  const double u = stream.uniform();
  if (branch < prior.p()) return prior.mu() * u;
  return prior.mu() - std::log(u) / prior.tail_rate();
}

inline double gamma_log_pdf(const GammaPrior& prior, double x) {
  if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
  return (prior.shape() - 1.0) * std::log(x) - x / prior.scale() - log_gamma(prior.shape()) -
         prior.shape() * std::log(prior.scale());
}

inline double log_pdf(const ComponentPrior& prior, double x) {
  return std::visit(
      [x](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ModifiedUniform>) {
          return modified_uniform_log_pdf(p, x);
        } else {
          return gamma_log_pdf(p, x);
        }
      },
      prior);
}

inline double pdf(const ComponentPrior& prior, double x) { return std::exp(log_pdf(prior, x)); }

inline double sample(RngStream& stream, const ComponentPrior& prior) {
  return std::visit(
      [&stream](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ModifiedUniform>) {
          return modified_uniform_sample(stream, p);
        } else {
          return draw_gamma(stream, p.shape(), p.scale());
        }
      },
      prior);
}

inline double mean(const ComponentPrior& prior) {
  return std::visit([](const auto& p) { return p.mean(); }, prior);
}

inline double variance(const ComponentPrior& prior) {
  return std::visit([](const auto& p) { return p.variance(); }, prior);
}

/// Independent priors over the components of a parameter vector.
class PriorProduct {
 public:
  explicit PriorProduct(std::vector<ComponentPrior> components) : components_(std::move(components)) {
    if (components_.empty()) throw ParameterError("PriorProduct: need at least one component");
  }

  static PriorProduct iid(const ComponentPrior& component, std::size_t k) {
    return PriorProduct(std::vector<ComponentPrior>(k, component));
  }

  std::size_t dimension() const noexcept { return components_.size(); }
  const std::vector<ComponentPrior>& components() const noexcept { return components_; }
  const ComponentPrior& operator[](std::size_t i) const { return components_.at(i); }

  /// Components drawn in index order from the one stream.
  ParamVector sample(RngStream& stream) const {
    ParamVector out;
    out.reserve(components_.size());
    for (const auto& c : components_) out.push_back(bbabc::sample(stream, c));
    return out;
  }

  /// Sum of component log densities; -inf outside the support.
  double log_pdf(const ParamVector& x) const {
    if (x.size() != components_.size()) {
      throw DimensionError("PriorProduct::log_pdf: expected " + std::to_string(components_.size()) +
                           " components, got " + std::to_string(x.size()));
    }
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double term = bbabc::log_pdf(components_[i], x[i]);
      if (term == -std::numeric_limits<double>::infinity()) return term;
      total += term;
    }
    return total;
  }

  ParamVector means() const {
    ParamVector out;
    for (const auto& c : components_) out.push_back(bbabc::mean(c));
    return out;
  }

  friend bool operator==(const PriorProduct&, const PriorProduct&) = default;

 private:
  std::vector<ComponentPrior> components_;
};

inline ParamVector product_sample(RngStream& stream, const PriorProduct& prior) { return prior.sample(stream); }
inline double product_log_pdf(const PriorProduct& prior, const ParamVector& x) { return prior.log_pdf(x); }

/// Built-in hyperparameter settings with pairwise matching moments.
namespace named_priors {
inline GammaPrior g1() { return {2.5, 0.52}; }
inline GammaPrior g2() { return {2.5, 1.04}; }
inline ModifiedUniform u1() { return {2.0, 0.8}; }
inline ModifiedUniform u2() { return {4.0, 0.8}; }
}  // namespace named_priors

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

inline double parse_double(const std::string& s, const std::string& context) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(context + ": cannot parse number '" + s + "'");
  }
}

}  // namespace detail

/// Parses "G1", "G2", "U1", "U2", "gamma(shape,scale)" or "moduniform(mu,p)".
inline ComponentPrior parse_component_prior(std::string_view text) {
  const std::string spec = detail::lower(detail::trim(text));
  if (spec == "g1") return named_priors::g1();
  if (spec == "g2") return named_priors::g2();
  if (spec == "u1") return named_priors::u1();
  if (spec == "u2") return named_priors::u2();
  const auto open = spec.find('(');
  const auto close = spec.rfind(')');
  if (open == std::string::npos || close == std::string::npos || close != spec.size() - 1) {
    throw ConfigError("unknown prior '" + std::string(text) + "'");
  }
  const std::string family = detail::trim(spec.substr(0, open));
  const std::string args = spec.substr(open + 1, close - open - 1);
  const auto comma = args.find(',');
  if (comma == std::string::npos) throw ConfigError("prior '" + std::string(text) + "' needs two arguments");
  const double first = detail::parse_double(detail::trim(args.substr(0, comma)), "prior");
  const double second = detail::parse_double(detail::trim(args.substr(comma + 1)), "prior");
  try {
    if (family == "gamma") return GammaPrior(first, second);
    if (family == "moduniform") return ModifiedUniform(first, second);
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("prior '") + std::string(text) + "': " + e.what());
  }
  throw ConfigError("unknown prior family '" + family + "'");
}

/// A single component spec applied to all k components, or k specs
/// separated by ';'.
inline PriorProduct parse_prior(std::string_view text, std::size_t k) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const auto semi = text.find(';', start);
    parts.push_back(detail::trim(text.substr(start, semi == std::string_view::npos ? semi : semi - start)));
    if (semi == std::string_view::npos) break;
    start = semi + 1;
  }
  if (parts.size() == 1) return PriorProduct::iid(parse_component_prior(parts[0]), k);
  if (parts.size() != k) {
    throw ConfigError("prior lists " + std::to_string(parts.size()) + " components but the model has " +
                      std::to_string(k));
  }
  std::vector<ComponentPrior> comps;
  for (const auto& p : parts) comps.push_back(parse_component_prior(p));
  return PriorProduct(std::move(comps));
}

}  // namespace bbabc

#endif  // BBABC_PRIORS_HPP
