#include "qcarnot/cycle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "qcarnot/thermo.hpp"

namespace qcarnot {

CornerGeometry carnot_corner_frequencies(double omega3,
                                         double compression_ratio,
                                         double t_cold, double t_hot) {
  if (!(omega3 > 0.0) || !(t_cold > 0.0) || !(t_hot > 0.0)) {
    throw ConfigError("omega3 and the temperatures must be positive");
  }
  if (!(compression_ratio > t_hot / t_cold)) {
    std::ostringstream os;
    os << "compression-ratio bound violated: C = " << compression_ratio
       << " must exceed T_h/T_c = " << t_hot / t_cold;
    throw ConfigError(os.str());
  }
  CornerGeometry g;
  g.omega3 = omega3;
  g.omega1 = compression_ratio * omega3;
  g.omega2 = omega3 * t_hot / t_cold;
  g.omega4 = g.omega1 * t_cold / t_hot;
  return g;
}

CornerGeometry endo_global_corner_frequencies(const CornerGeometry& base,
                                              double t_cold_g, double t_hot_g,
                                              double t_cold, double t_hot) {
  if (!(t_cold_g > 0.0) || !(t_hot_g > 0.0) || !(t_cold > 0.0) ||
      !(t_hot > 0.0)) {
    throw ConfigError("temperatures must be positive");
  }
  CornerGeometry g;
  g.omega1 = t_hot_g * base.omega1 / t_hot;
  g.omega3 = t_cold_g * base.omega3 / t_cold;
  g.omega2 = g.omega3 * t_hot_g / t_cold_g;
  g.omega4 = g.omega1 * t_cold_g / t_hot_g;
  return g;
}

CornerGeometry geometry_of(const CycleSpec& spec) {
  return {spec.omega1, spec.omega2, spec.omega3, spec.omega4};
}

std::string_view to_string(StrokeKind kind) {
  switch (kind) {
    case StrokeKind::Ste: return "ste";
    case StrokeKind::SteNonThermal: return "ste_nonthermal";
    case StrokeKind::Sta: return "sta";
    case StrokeKind::ConstantMuOpen: return "constant_mu_open";
    case StrokeKind::ConstantMuUnitary: return "constant_mu_unitary";
  }
  return "unknown";
}

namespace {

constexpr std::array<const char*, 4> kStrokeNames{
    "open_expansion", "adiabatic_expansion", "open_compression",
    "adiabatic_compression"};

// Re-throws a builder error with the stroke name in front, keeping its type.
template <class Fn>
StrokeDescriptor with_stroke_context(const std::string& name, Fn&& build) {
  const std::string pre = name + ": ";
  try {
    return build();
  } catch (const InvalidProtocol& e) {
    throw InvalidProtocol(pre + e.what(), e.time());
  } catch (const InfeasibleStroke& e) {
    throw InfeasibleStroke(pre + e.what(), e.time());
  } catch (const ProtocolInversionFailure& e) {
    throw ProtocolInversionFailure(pre + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(pre + e.what());
  } catch (const DomainError& e) {
    throw DomainError(pre + e.what());
  }
}

StrokeDescriptor open_shortcut(const CycleSpec& spec, int index, double wi,
                               double wf, const BathSpec& bath,
                               double internal_temperature) {
  return with_stroke_context(kStrokeNames[index], [&] {
    StrokeDescriptor s;
    s.name = kStrokeNames[index];
    s.omega_initial = wi;
    s.omega_final = wf;
    s.bath = bath;
    if (spec.kind == CycleKind::EndoShortcut) {
      s.kind = StrokeKind::SteNonThermal;
      s.ste = build_ste_nonthermal_protocol(wi, wf, spec.open_stroke_duration,
                                            internal_temperature, bath);
    } else {
      s.kind = StrokeKind::Ste;
      s.ste = build_ste_protocol(wi, wf, spec.open_stroke_duration, bath);
    }
    s.protocol = s.ste->protocol;
    return s;
  });
}

StrokeDescriptor adiabat_shortcut(const CycleSpec& spec, int index, double wi,
                                  double wf) {
  return with_stroke_context(kStrokeNames[index], [&] {
    StrokeDescriptor s;
    s.name = kStrokeNames[index];
    s.kind = StrokeKind::Sta;
    s.omega_initial = wi;
    s.omega_final = wf;
    s.gamma_d = spec.gamma_d;
    auto sta = build_sta_protocol(wi, wf, spec.adiabat_duration);
    s.protocol = std::move(sta.protocol);
    s.sta = sta.ermakov;
    return s;
  });
}

StrokeDescriptor constant_mu_stroke(const CycleSpec& spec, int index,
                                    double wi, double wf,
                                    std::optional<BathSpec> bath) {
  return with_stroke_context(kStrokeNames[index], [&] {
    StrokeDescriptor s;
    s.name = kStrokeNames[index];
    s.kind = bath ? StrokeKind::ConstantMuOpen : StrokeKind::ConstantMuUnitary;
    s.omega_initial = wi;
    s.omega_final = wf;
    s.bath = bath;
    if (!bath) s.gamma_d = spec.gamma_d;
    // Negative mu on expansions, positive on compressions.
    const double mu = wf < wi ? -spec.mu_magnitude : spec.mu_magnitude;
    s.protocol = build_constant_mu_protocol(wi, wf, mu);
    return s;
  });
}

StrokeMap map_of(const StrokeDescriptor& s, const OdeTolerances& tol) {
  if (s.bath) return stroke_map_open(s.protocol, *s.bath, tol);
  if (s.gamma_d > 0.0) return stroke_map_dephasing(s.protocol, s.gamma_d, std::nullopt, tol);
  if (s.protocol.kind() == FrequencyProtocol::Kind::ConstantMu) {
    StrokeMap m;
    if (s.protocol.duration() == 0.0) return m;
    m.propagator = free_propagator(s.protocol.omega_initial(),
                                   s.protocol.constant_mu_value(),
                                   s.protocol.duration());
    // Closed stroke: W = h(T) - h(0).
    m.work = m.propagator.row(0);
    m.work[0] -= 1.0;
    return m;
  }
  return stroke_map_unitary(s.protocol, tol);
}

Trajectory propagate_stroke(const StrokeDescriptor& s,
                            const ObservableVector& v0,
                            const PropagationOptions& opt) {
  if (s.bath) return propagate_open(v0, s.protocol, *s.bath, opt);
  if (s.gamma_d > 0.0) {
    return propagate_dephasing(v0, s.protocol, s.gamma_d, std::nullopt, opt);
  }
  return propagate_unitary(v0, s.protocol, opt);
}

}  // namespace

std::array<StrokeDescriptor, 4> assemble_cycle(const CycleSpec& spec) {
  spec.validate(false);
  const double w1 = spec.omega1, w2 = spec.omega2, w3 = spec.omega3,
               w4 = spec.omega4;
  const BathSpec hot = spec.hot_bath();
  const BathSpec cold = spec.cold_bath();
  switch (spec.kind) {
    case CycleKind::CarnotShortcut:
    case CycleKind::EndoShortcut:
      return {open_shortcut(spec, 0, w1, w2, hot, spec.t_hot_internal),
              adiabat_shortcut(spec, 1, w2, w3),
              open_shortcut(spec, 2, w3, w4, cold, spec.t_cold_internal),
              adiabat_shortcut(spec, 3, w4, w1)};
    case CycleKind::EndoGlobal:
      return {constant_mu_stroke(spec, 0, w1, w2, hot),
              constant_mu_stroke(spec, 1, w2, w3, std::nullopt),
              constant_mu_stroke(spec, 2, w3, w4, cold),
              constant_mu_stroke(spec, 3, w4, w1, std::nullopt)};
  }
  throw ConfigError("unknown cycle kind");
}

double CycleResult::cycle_time() const {
  double t = 0.0;
  for (const auto& s : strokes) t += s.duration();
  return t;
}

ObservableVector default_initial_state(const CycleSpec& spec) {
  const double t = spec.kind == CycleKind::EndoShortcut ? spec.t_hot_internal
                                                         : spec.t_hot_bath;
  return thermal_observable_vector(spec.omega1, t);
}

double corner_change(const ObservableVector& a, const ObservableVector& b) {
  const double scale = std::max(std::abs(a.h), std::abs(b.h));
  if (scale == 0.0) return 0.0;
  return std::max({std::abs(a.h - b.h), std::abs(a.l - b.l),
                   std::abs(a.c - b.c)}) /
         scale;
}

CycleResult run_to_limit_cycle(const CycleSpec& spec, const ObservableVector& v0,
                               const LimitCycleOptions& options) {
  if (!(options.tol > 0.0)) throw ConfigError("tolerance must be positive");
  if (options.max_cycles == 0) throw ConfigError("max_cycles must be positive");
  CycleResult result;
  result.spec = spec;
  result.strokes = assemble_cycle(spec);

  // Every stroke is affine in (h, l, c), so the cycle map is one 4x4 matrix.
  Matrix4 cycle_map = Matrix4::Identity();
  for (const auto& s : result.strokes) {
    cycle_map = map_of(s, options.propagation.tol).propagator * cycle_map;
  }
  Eigen::Vector4d v(v0.h, v0.l, v0.c, 1.0);
  for (std::size_t k = 1; k <= options.max_cycles; ++k) {
    const Eigen::Vector4d next = cycle_map * v;
    const double r = corner_change({next[0], next[1], next[2], 1.0},
                                   {v[0], v[1], v[2], 1.0});
    if (!std::isfinite(r)) {
      throw NumericalError("cycle map produced a non-finite state");
    }
    result.residuals.push_back(r);
    v = next;
    if (r < options.tol) {
      result.iterations = k;
      result.converged = true;
      break;
    }
  }
  if (!result.converged) {
    std::ostringstream os;
    os << "limit cycle not reached after " << options.max_cycles
       << " cycles (last corner change " << result.residuals.back() << ")";
    throw NonConvergence(os.str(), result.residuals);
  }

  ObservableVector corner{v[0], v[1], v[2], 1.0};
  for (std::size_t k = 0; k < 4; ++k) {
    result.corners[k] = corner;
    result.trajectories[k] =
        propagate_stroke(result.strokes[k], corner, options.propagation);
    corner = result.trajectories[k].back();
  }
  result.periodicity_error = corner_change(corner, result.corners[0]);
  return result;
}

CycleResult run_to_limit_cycle(const CycleSpec& spec,
                               const LimitCycleOptions& options) {
  return run_to_limit_cycle(spec, default_initial_state(spec), options);
}

nlohmann::json cycle_spec_json(const CycleSpec& s) {
  return {{"kind", std::string(to_string(s.kind))},
          {"omega1", s.omega1},
          {"omega2", s.omega2},
          {"omega3", s.omega3},
          {"omega4", s.omega4},
          {"t_hot_bath", s.t_hot_bath},
          {"t_cold_bath", s.t_cold_bath},
          {"coupling", s.coupling},
          {"open_stroke_duration", s.open_stroke_duration},
          {"adiabat_duration", s.adiabat_duration},
          {"t_hot_internal", s.t_hot_internal},
          {"t_cold_internal", s.t_cold_internal},
          {"mu_magnitude", s.mu_magnitude},
          {"gamma_d", s.gamma_d}};
}

nlohmann::json cycle_summary_json(const CycleResult& r) {
  nlohmann::json corners = nlohmann::json::array();
  for (std::size_t k = 0; k < 4; ++k) {
    const auto& v = r.corners[k];
    const double w = r.strokes[k].omega_initial;
    corners.push_back({{"omega", w},
                       {"h", v.h},
                       {"l", v.l},
                       {"c", v.c},
                       {"coherence", coherence(v, w)},
                       {"entropy", von_neumann_entropy(v, w)}});
  }
  nlohmann::json strokes = nlohmann::json::array();
  for (std::size_t k = 0; k < 4; ++k) {
    const auto& s = r.strokes[k];
    nlohmann::json j = {{"name", s.name},
                        {"kind", std::string(to_string(s.kind))},
                        {"omega_initial", s.omega_initial},
                        {"omega_final", s.omega_final},
                        {"duration", s.duration()},
                        {"gamma_d", s.gamma_d}};
    if (s.bath) j["bath_temperature"] = s.bath->temperature;
    strokes.push_back(j);
  }
  const std::size_t keep = std::min<std::size_t>(r.residuals.size(), 10);
  const std::vector<double> tail(r.residuals.end() - static_cast<long>(keep),
                                 r.residuals.end());
  return {{"spec", cycle_spec_json(r.spec)},
          {"cycle_time", r.cycle_time()},
          {"cycle_time_units", to_reporting_time(r.cycle_time())},
          {"converged", r.converged},
          {"iterations", r.iterations},
          {"residual_tail", tail},
          {"periodicity_error", r.periodicity_error},
          {"corners", corners},
          {"strokes", strokes}};
}

void export_cycle_result(const CycleResult& result,
                         const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (std::size_t k = 0; k < 4; ++k) {
    const auto path = dir / ("stroke_" + std::to_string(k + 1) + "_" +
                             result.strokes[k].name + ".csv");
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot write " + path.string());
    write_trajectory_csv(os, result.trajectories[k]);
  }
  std::ofstream js(dir / "summary.json");
  if (!js) throw ConfigError("cannot write " + (dir / "summary.json").string());
  js << cycle_summary_json(result).dump(2) << '\n';
}

}  // namespace qcarnot
