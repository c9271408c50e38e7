#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dwass/family.hpp"
#include "dwass/json_measure.hpp"
#include "dwass/metric.hpp"

namespace dwass {

/// Serializable witness of a broken embedding property. `inputs` holds the
/// probe measures so a failure can be replayed from the certificate alone.
struct Certificate {
  std::string kind;  // "well-definedness" | "distance-distortion" | "support-collision" | ...
  OrderedJson inputs = OrderedJson::array();
  OrderedJson details = OrderedJson::object();

  OrderedJson to_json() const {
    return OrderedJson{{"kind", kind}, {"inputs", inputs}, {"details", details}};
  }
};

/// A measure-in measure-out black box. Outputs are plain measures rather
/// than probability measures so truncating maps (the prime-power family at
/// t = 1) can hand back their epsilon-short images.
template <class M>
struct EmbeddingOracle {
  std::string name;
  std::function<SparseMeasure<M>(const ProbabilityMeasure<M>&)> eval;
};

template <class M>
bool is_dirac(const SparseMeasure<M>& mu) {
  return mu.support_size() == 1 && mass_traits<M>::eq(mu.entries().begin()->second, mass_traits<M>::one());
}

template <class M>
struct ApplyResult {
  SparseMeasure<M> image;
  M tail = mass_traits<M>::zero();
};

/// Image of mu under the map generated by a family: the sum over the support
/// of each point's curve at that point's mass. The family is verified on the
/// support first unless the caller opts out (generated families are valid by
/// construction). Truncated tail mass is accumulated and reported.
template <class M>
ApplyResult<M> apply_embedding(const AllocationFamily<M>& family, const ProbabilityMeasure<M>& mu,
                               const M& epsilon, bool verify = true) {
  using traits = mass_traits<M>;
  if (verify) {
    std::vector<M> grid;
    for (const auto& [point, mass] : mu.measure().entries()) grid.push_back(mass);
    grid.push_back(traits::one());
    VerificationReport report = verify_family(family, mu.support(), grid, epsilon);
    if (!report.pass()) throw FamilyInvalidError(std::move(report));
  }
  MeasureBuilder<M> image;
  M tail = traits::zero();
  for (const auto& [point, mass] : mu.measure().entries()) {
    CurveSample<M> sample = curve_at(family.curve_for(point), mass, epsilon);
    for (const auto& [target, part] : sample.measure.entries()) image.add(target, part);
    tail += sample.tail;
  }
  return ApplyResult<M>{std::move(image).build(), std::move(tail)};
}

template <class M>
EmbeddingOracle<M> make_family_oracle(AllocationFamily<M> family, M epsilon, std::string name,
                                      bool verify_inputs = false) {
  return EmbeddingOracle<M>{
      std::move(name), [family = std::move(family), epsilon = std::move(epsilon),
                        verify_inputs](const ProbabilityMeasure<M>& mu) {
        return apply_embedding(family, mu, epsilon, verify_inputs).image;
      }};
}

template <class M>
struct IsometryCheckReport {
  bool pass = true;
  std::uint64_t trials = 0;
  std::optional<Certificate> counterexample;

  OrderedJson to_json() const {
    OrderedJson out{{"pass", pass}, {"trials", trials}};
    if (counterexample) out["counterexample"] = counterexample->to_json();
    return out;
  }
};

template <class M>
std::size_t joint_support_size(const SparseMeasure<M>& mu, const SparseMeasure<M>& nu) {
  auto a = mu.support();
  auto b = nu.support();
  std::vector<PointId> joined;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(joined));
  return joined.size();
}

/// Samples measure pairs and compares the transport power of the images with
/// the transport power of the inputs. Exact by default; `slack_per_point`
/// admits truncating oracles, scaled by the joint support size.
template <class M>
IsometryCheckReport<M> check_isometric_embedding(
    const EmbeddingOracle<M>& oracle, const std::function<ProbabilityMeasure<M>()>& sampler,
    std::uint64_t trials, const M& slack_per_point = mass_traits<M>::zero()) {
  using traits = mass_traits<M>;
  IsometryCheckReport<M> report;
  report.trials = trials;
  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    const ProbabilityMeasure<M> mu = sampler();
    const ProbabilityMeasure<M> nu = sampler();
    const SparseMeasure<M> image_mu = oracle.eval(mu);
    const SparseMeasure<M> image_nu = oracle.eval(nu);
    const M expected = wasserstein_power(mu, nu);
    const M actual = wasserstein_power(image_mu, image_nu);
    const M bound =
        M(slack_per_point * M(traits::from_rational(Rational(joint_support_size(mu.measure(), nu.measure())))));
    const M gap = expected < actual ? M(actual - expected) : M(expected - actual);
    if (!traits::leq(gap, bound)) {
      report.pass = false;
      Certificate cert;
      cert.kind = "distance-distortion";
      cert.inputs.push_back(measure_to_json(mu));
      cert.inputs.push_back(measure_to_json(nu));
      cert.details = OrderedJson{{"trial", trial},
                                 {"image-left", measure_to_json(image_mu)},
                                 {"image-right", measure_to_json(image_nu)},
                                 {"input-power", mass_to_json(expected)},
                                 {"image-power", mass_to_json(actual)},
                                 {"allowed-gap", mass_to_json(bound)}};
      report.counterexample = std::move(cert);
      return report;
    }
  }
  return report;
}

struct NotDiracPreservingError : std::runtime_error {
  NotDiracPreservingError(PointId point, std::string image_dump)
      : std::runtime_error("image of the point mass at " + point.str() +
                           " is not a point mass: " + image_dump),
        x(std::move(point)) {}
  PointId x;
};

/// Reads the induced relabeling off the Dirac images over a window and spot
/// checks that pushing forward along it reproduces the oracle. Throws
/// NotDiracPreservingError when some Dirac image is not Dirac.
template <class M>
PointMap recover_permutation(const EmbeddingOracle<M>& oracle, const std::vector<PointId>& window,
                             const std::function<ProbabilityMeasure<M>()>& sampler = nullptr,
                             std::uint64_t spot_checks = 0) {
  std::map<PointId, PointId> table;
  for (const auto& x : window) {
    const SparseMeasure<M> image = oracle.eval(dirac<M>(x));
    if (!is_dirac(image)) {
      throw NotDiracPreservingError(x, measure_to_json(image).dump());
    }
    table[x] = image.entries().begin()->first;
  }
  PointMap sigma = PointMap::table(std::move(table));  // throws if not injective
  for (std::uint64_t i = 0; i < spot_checks; ++i) {
    const ProbabilityMeasure<M> mu = sampler();
    const SparseMeasure<M> image = oracle.eval(mu);
    const SparseMeasure<M> expected = push_forward(mu.measure(), sigma);
    if (image != expected) {
      throw std::runtime_error("oracle is not the push-forward of its Dirac action: input " +
                               measure_to_json(mu).dump() + ", image " + measure_to_json(image).dump() +
                               ", push-forward " + measure_to_json(expected).dump());
    }
  }
  return sigma;
}

template <class M>
struct ExtractionOutcome {
  std::optional<AllocationFamily<M>> family;
  std::vector<Certificate> certificates;

  bool ok() const { return certificates.empty(); }
};

/// Recovers the allocation family of a black-box embedding on a finite
/// window and grid. Each curve value at t < 1 is read off through a
/// two-point probe t*delta_x + (1-t)*delta_y restricted to the block of x;
/// every additional companion must reproduce it exactly, otherwise the
/// mismatch comes back as a well-definedness certificate. The assembled
/// curves are piecewise ramps interpolating the grid samples.
template <class M>
ExtractionOutcome<M> extract_family(const EmbeddingOracle<M>& oracle,
                                    const std::vector<PointId>& window_in,
                                    const std::vector<M>& grid_in,
                                    const std::vector<PointId>& companions) {
  using traits = mass_traits<M>;
  ExtractionOutcome<M> outcome;

  std::vector<PointId> window = window_in;
  std::sort(window.begin(), window.end());
  window.erase(std::unique(window.begin(), window.end()), window.end());
  if (window.empty()) throw std::invalid_argument("extraction window must be nonempty");

  std::vector<M> grid = grid_in;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (grid.empty() || !(traits::zero() < grid.front()) || !traits::eq(grid.back(), traits::one())) {
    throw std::invalid_argument("extraction grid must lie in (0,1] and contain 1");
  }
  for (const auto& x : window) {
    if (std::none_of(companions.begin(), companions.end(),
                     [&](const PointId& y) { return y != x; })) {
      throw std::invalid_argument("every window point needs a companion distinct from it");
    }
  }

  // Blocks: supports of the Dirac images, which must be pairwise disjoint.
  std::map<PointId, SparseMeasure<M>> dirac_images;
  std::map<PointId, std::vector<PointId>> blocks;
  for (const auto& x : window) {
    SparseMeasure<M> image = oracle.eval(dirac<M>(x));
    blocks[x] = image.support();
    dirac_images.emplace(x, std::move(image));
  }
  for (std::size_t i = 0; i < window.size(); ++i) {
    for (std::size_t j = i + 1; j < window.size(); ++j) {
      std::vector<PointId> shared;
      const auto& a = blocks[window[i]];
      const auto& b = blocks[window[j]];
      std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(shared));
      if (!shared.empty()) {
        Certificate cert;
        cert.kind = "support-collision";
        cert.inputs.push_back(measure_to_json(dirac<M>(window[i])));
        cert.inputs.push_back(measure_to_json(dirac<M>(window[j])));
        cert.details = OrderedJson{{"x", point_to_string(window[i])},
                                   {"y", point_to_string(window[j])},
                                   {"shared-point", point_to_string(shared.front())},
                                   {"image-x", measure_to_json(dirac_images.at(window[i]))},
                                   {"image-y", measure_to_json(dirac_images.at(window[j]))}};
        outcome.certificates.push_back(std::move(cert));
        return outcome;
      }
    }
  }

  std::map<PointId, AllocationCurve<M>> curves;
  for (const auto& x : window) {
    const auto& block = blocks.at(x);
    std::vector<SparseMeasure<M>> samples;
    std::optional<ProbabilityMeasure<M>> previous_probe;

    for (const auto& t : grid) {
      if (traits::eq(t, traits::one())) {
        samples.push_back(dirac_images.at(x));
        previous_probe = dirac<M>(x);
        continue;
      }
      std::optional<SparseMeasure<M>> value;
      std::optional<ProbabilityMeasure<M>> first_probe;
      PointId first_companion = x;
      for (const auto& y : companions) {
        if (y == x) continue;
        typename SparseMeasure<M>::map_type probe_entries;
        probe_entries.emplace(x, t);
        probe_entries.emplace(y, M(traits::one() - t));
        const ProbabilityMeasure<M> probe(SparseMeasure<M>::from_entries(std::move(probe_entries)));
        SparseMeasure<M> restricted = restrict_to(oracle.eval(probe), block);
        if (!value.has_value()) {
          if (!traits::eq(restricted.total(), t)) {
            Certificate cert;
            cert.kind = "well-definedness";
            cert.inputs.push_back(measure_to_json(dirac<M>(x)));
            cert.inputs.push_back(measure_to_json(probe));
            cert.details = OrderedJson{{"x", point_to_string(x)},
                                       {"t", mass_to_json(t)},
                                       {"companion", point_to_string(y)},
                                       {"reason", "restricted image mass differs from the point's mass"},
                                       {"restricted-total", mass_to_json(restricted.total())},
                                       {"restriction", measure_to_json(restricted)}};
            outcome.certificates.push_back(std::move(cert));
            return outcome;
          }
          value = std::move(restricted);
          first_probe = probe;
          first_companion = y;
        } else if (restricted != *value) {
          Certificate cert;
          cert.kind = "well-definedness";
          cert.inputs.push_back(measure_to_json(*first_probe));
          cert.inputs.push_back(measure_to_json(probe));
          cert.details = OrderedJson{{"x", point_to_string(x)},
                                     {"t", mass_to_json(t)},
                                     {"companion-a", point_to_string(first_companion)},
                                     {"companion-b", point_to_string(y)},
                                     {"reason", "restricted images disagree between companions"},
                                     {"restriction-a", measure_to_json(*value)},
                                     {"restriction-b", measure_to_json(restricted)}};
          outcome.certificates.push_back(std::move(cert));
          return outcome;
        }
      }
      if (!samples.empty() && !leq(samples.back(), *value)) {
        Certificate cert;
        cert.kind = "well-definedness";
        cert.inputs.push_back(measure_to_json(*previous_probe));
        cert.inputs.push_back(measure_to_json(*first_probe));
        cert.details = OrderedJson{{"x", point_to_string(x)},
                                   {"t", mass_to_json(t)},
                                   {"reason", "restricted images are not monotone in the mass at x"}};
        outcome.certificates.push_back(std::move(cert));
        return outcome;
      }
      samples.push_back(std::move(*value));
      previous_probe = first_probe;
    }
    // Monotonicity against the t = 1 sample (truncating oracles violate it).
    if (samples.size() >= 2 && !leq(samples[samples.size() - 2], samples.back())) {
      Certificate cert;
      cert.kind = "well-definedness";
      cert.inputs.push_back(measure_to_json(dirac<M>(x)));
      cert.details = OrderedJson{{"x", point_to_string(x)},
                                 {"reason", "restricted images are not monotone in the mass at x"}};
      outcome.certificates.push_back(std::move(cert));
      return outcome;
    }
    if (!traits::eq(samples.back().total(), traits::one())) {
      Certificate cert;
      cert.kind = "well-definedness";
      cert.inputs.push_back(measure_to_json(dirac<M>(x)));
      cert.details = OrderedJson{{"x", point_to_string(x)},
                                 {"t", mass_to_json(traits::one())},
                                 {"reason", "restricted image mass differs from the point's mass"},
                                 {"restricted-total", mass_to_json(samples.back().total())}};
      outcome.certificates.push_back(std::move(cert));
      return outcome;
    }

    std::vector<M> breakpoints = grid;
    std::vector<SparseMeasure<M>> increments;
    std::vector<SparseMeasure<M>> directions;
    M previous_t = traits::zero();
    for (std::size_t i = 0; i < grid.size(); ++i) {
      SparseMeasure<M> increment =
          i == 0 ? samples[0] : positive_difference(samples[i], samples[i - 1]);
      const M length = M(grid[i] - previous_t);
      directions.push_back(scale(M(traits::one() / length), increment));
      increments.push_back(std::move(increment));
      previous_t = grid[i];
    }
    curves.emplace(x, make_piecewise_curve<M>(std::move(breakpoints), std::move(increments),
                                              std::move(directions)));
  }
  outcome.family = AllocationFamily<M>::explicit_curves(std::move(curves));
  return outcome;
}

/// Predicate bundle over a finite window: Dirac preservation, mass
/// splitting, sampled shape preservation, and whether a single relabeling
/// reproduces the whole map.
template <class M>
struct ClassificationReport {
  std::vector<PointId> window;
  std::uint64_t samples = 0;
  bool permutation_induced = false;
  bool preserves_dirac = false;
  bool splits_mass = false;
  bool shape_preserving = false;
  bool exotic = false;
  std::optional<PointMap> sigma;
  std::vector<Certificate> witnesses;

  OrderedJson to_json() const {
    OrderedJson out{{"window", window_to_json(window)},
                    {"samples", samples},
                    {"permutation-induced", permutation_induced},
                    {"preserves-dirac", preserves_dirac},
                    {"splits-mass", splits_mass},
                    {"shape-preserving", shape_preserving},
                    {"exotic", exotic}};
    if (sigma.has_value()) {
      OrderedJson table = OrderedJson::object();
      for (const auto& [from, to] : sigma->overrides()) {
        table[point_to_string(from)] = point_to_string(to);
      }
      out["sigma"] = std::move(table);
    }
    OrderedJson witness_array = OrderedJson::array();
    for (const auto& w : witnesses) witness_array.push_back(w.to_json());
    out["witnesses"] = std::move(witness_array);
    return out;
  }
};

template <class M>
std::vector<M> sorted_masses(const SparseMeasure<M>& mu) {
  std::vector<M> masses;
  masses.reserve(mu.entries().size());
  for (const auto& [point, mass] : mu.entries()) masses.push_back(mass);
  std::sort(masses.begin(), masses.end());
  return masses;
}

template <class M>
bool same_mass_multiset(const SparseMeasure<M>& a, const SparseMeasure<M>& b) {
  const auto ma = sorted_masses(a);
  const auto mb = sorted_masses(b);
  if (ma.size() != mb.size()) return false;
  for (std::size_t i = 0; i < ma.size(); ++i) {
    if (!mass_traits<M>::eq(ma[i], mb[i])) return false;
  }
  return true;
}

template <class M>
ClassificationReport<M> classify_embedding(const EmbeddingOracle<M>& oracle,
                                           const std::vector<PointId>& window,
                                           const std::function<ProbabilityMeasure<M>()>& sampler,
                                           std::uint64_t trials) {
  ClassificationReport<M> report;
  report.window = window;
  std::sort(report.window.begin(), report.window.end());
  report.window.erase(std::unique(report.window.begin(), report.window.end()), report.window.end());

  report.preserves_dirac = true;
  std::map<PointId, PointId> table;
  bool sigma_injective = true;
  for (const auto& x : report.window) {
    const SparseMeasure<M> image = oracle.eval(dirac<M>(x));
    if (!is_dirac(image)) {
      if (report.preserves_dirac) {
        Certificate cert;
        cert.kind = "property-violation";
        cert.inputs.push_back(measure_to_json(dirac<M>(x)));
        cert.details = OrderedJson{{"predicate", "preserves-dirac"},
                                   {"image", measure_to_json(image)}};
        report.witnesses.push_back(std::move(cert));
      }
      report.preserves_dirac = false;
    } else {
      table[x] = image.entries().begin()->first;
    }
  }
  report.splits_mass = !report.preserves_dirac;

  std::optional<PointMap> sigma;
  if (report.preserves_dirac) {
    try {
      sigma = PointMap::table(std::move(table));
    } catch (const std::invalid_argument&) {
      sigma_injective = false;
    }
  }

  // Samples: the window Diracs first, then the requested number of draws.
  std::vector<ProbabilityMeasure<M>> probes;
  for (const auto& x : report.window) probes.push_back(dirac<M>(x));
  for (std::uint64_t i = 0; i < trials; ++i) probes.push_back(sampler());
  report.samples = probes.size();

  report.shape_preserving = true;
  bool reproduces = sigma.has_value();
  for (const auto& mu : probes) {
    const SparseMeasure<M> image = oracle.eval(mu);
    if (report.shape_preserving && !same_mass_multiset(mu.measure(), image)) {
      report.shape_preserving = false;
      Certificate cert;
      cert.kind = "property-violation";
      cert.inputs.push_back(measure_to_json(mu));
      cert.details = OrderedJson{{"predicate", "shape-preserving"},
                                 {"image", measure_to_json(image)}};
      report.witnesses.push_back(std::move(cert));
    }
    if (reproduces) {
      SparseMeasure<M> expected;
      bool pushable = true;
      try {
        expected = push_forward(mu.measure(), *sigma);
      } catch (const std::invalid_argument&) {
        pushable = false;
      }
      if (!pushable || image != expected) {
        reproduces = false;
        Certificate cert;
        cert.kind = "property-violation";
        cert.inputs.push_back(measure_to_json(mu));
        cert.details = OrderedJson{{"predicate", "permutation-induced"},
                                   {"image", measure_to_json(image)}};
        report.witnesses.push_back(std::move(cert));
      }
    }
  }
  report.exotic = !report.shape_preserving;
  report.permutation_induced = report.preserves_dirac && sigma_injective && reproduces;
  if (report.permutation_induced) report.sigma = std::move(sigma);
  return report;
}

}  // namespace dwass
