#include "qcarnot/thermo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include <openssl/evp.h>

namespace qcarnot {

double coherence(const ObservableVector& v, double omega) {
  if (!(omega > 0.0)) throw DomainError("coherence: omega must be > 0");
  return std::hypot(v.l, v.c) / (kHbar * omega);
}

double von_neumann_entropy(const ObservableVector& v, double omega) {
  if (!(omega > 0.0)) throw DomainError("entropy: omega must be > 0");
  const double cas = v.casimir();
  const double x = cas > 0.0 ? std::sqrt(cas) / (kHbar * omega) : 0.0;
  if (x < 0.5 - 1e-9) {
    std::ostringstream os;
    os << "unphysical state: symplectic excitation " << x << " < 1/2";
    throw DomainError(os.str());
  }
  const double n = std::max(x - 0.5, 0.0);
  if (n == 0.0) return 0.0;
  return (n + 1.0) * std::log1p(n) - n * std::log(n);
}

double quadrature_work(const Trajectory& traj) {
  const std::size_t n = traj.size();
  if (traj.vectors.size() != n || traj.omegas.size() != n ||
      traj.omega_dots.size() != n) {
    throw DomainError("stroke_work: trajectory arrays have mismatched grids");
  }
  if (n < 2) return 0.0;
  std::vector<double> f(n);
  for (std::size_t i = 0; i < n; ++i) {
    f[i] = traj.omega_dots[i] / traj.omegas[i] *
           (traj.vectors[i].h - traj.vectors[i].l);
  }
  const double h = (traj.times.back() - traj.times.front()) /
                   static_cast<double>(n - 1);
  // Composite Simpson on the even part, trapezoid on a leftover interval.
  const std::size_t m = (n - 1) % 2 == 0 ? n : n - 1;
  double acc = 0.0;
  for (std::size_t i = 0; i + 2 < m; i += 2) {
    acc += h / 3.0 * (f[i] + 4.0 * f[i + 1] + f[i + 2]);
  }
  if (m != n) acc += 0.5 * h * (f[n - 2] + f[n - 1]);
  return acc;
}

double stroke_work(const Trajectory& traj) {
  if (traj.size() == 0) throw DomainError("stroke_work: empty trajectory");
  if (traj.work.size() == traj.size()) return traj.work.back() - traj.work.front();
  return quadrature_work(traj);
}

double stroke_heat(const Trajectory& traj, double work) {
  if (traj.size() == 0) throw DomainError("stroke_heat: empty trajectory");
  return (traj.back().h - traj.front().h) - work;
}

double ideal_carnot_work(const CornerGeometry& g, double t_cold, double t_hot,
                         std::string* warning) {
  if (warning != nullptr) {
    warning->clear();
    if (t_hot == t_cold) {
      *warning = "T_h = T_c: degenerate geometry, the reversible cycle does no work";
    } else if (!(g.compression_ratio() > t_hot / t_cold)) {
      *warning = "compression ratio does not exceed T_h/T_c";
    }
  }
  const double n1 = thermal_population(g.omega1, t_hot);
  const double n2 = thermal_population(g.omega2, t_hot);
  return kHbar * (g.omega3 - g.omega2) * (n2 + 1.0) +
         kHbar * (g.omega1 - g.omega4) * (n1 + 1.0) +
         kBoltzmann * (t_hot - t_cold) * std::log(n1 / n2);
}

FrictionFit friction_action_fit(
    std::span<const std::pair<double, double>> samples) {
  if (samples.size() < 3) {
    throw DomainError("friction_action_fit needs at least three samples");
  }
  double sx = 0.0, sy = 0.0;
  for (const auto& [tau, w] : samples) {
    if (!(tau > 0.0)) throw DomainError("cycle times must be positive");
    sx += 1.0 / tau;
    sy += w;
  }
  const double n = static_cast<double>(samples.size());
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [tau, w] : samples) {
    const double dx = 1.0 / tau - mx;
    sxx += dx * dx;
    sxy += dx * (w - my);
  }
  if (!(sxx > 1e-14 * mx * mx * n)) {
    throw DomainError("friction_action_fit: cycle times are not distinct");
  }
  FrictionFit fit;
  fit.friction_action = sxy / sxx;
  fit.w_infinity = my - fit.friction_action * mx;
  double ss = 0.0;
  for (const auto& [tau, w] : samples) {
    const double r = w - (fit.w_infinity + fit.friction_action / tau);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

std::string_view to_string(OperationalMode m) {
  switch (m) {
    case OperationalMode::Engine: return "engine";
    case OperationalMode::Dissipator: return "dissipator";
    case OperationalMode::Other: return "other";
  }
  return "other";
}

CycleLedger analyze_cycle(const CycleResult& result, const CycleSpec& spec) {
  if (!result.converged) {
    throw DomainError("analyze_cycle needs a converged limit cycle");
  }
  CycleLedger L;
  L.min_coherence = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < 4; ++k) {
    const Trajectory& tr = result.trajectories[k];
    L.work_per_stroke[k] = stroke_work(tr);
    L.energy_change[k] = tr.back().h - tr.front().h;
    L.heat_per_stroke[k] = L.energy_change[k] - L.work_per_stroke[k];
    L.total_work += L.work_per_stroke[k];
    L.cycle_time += tr.duration();
    L.corner_coherence[k] = coherence(result.corners[k], tr.omegas.front());
    for (std::size_t i = 0; i < tr.size(); ++i) {
      L.min_coherence = std::min(L.min_coherence, coherence(tr.vectors[i], tr.omegas[i]));
    }
  }
  L.q_hot = L.heat_per_stroke[0];
  L.q_cold = L.heat_per_stroke[2];
  L.power = L.cycle_time > 0.0 ? -L.total_work / L.cycle_time : 0.0;
  L.efficiency = L.q_hot > 0.0 ? -L.total_work / L.q_hot
                               : std::numeric_limits<double>::quiet_NaN();
  if (L.total_work < 0.0 && L.q_hot > 0.0) {
    L.operational_mode = OperationalMode::Engine;
  } else if (L.total_work > 0.0 && L.q_cold < 0.0) {
    L.operational_mode = OperationalMode::Dissipator;
  }
  L.bath_entropy_flow = L.q_hot / spec.t_hot_bath + L.q_cold / spec.t_cold_bath;
  return L;
}

std::string_view to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::CycleTime: return "cycle_time";
    case SweepAxis::Dephasing: return "dephasing";
    case SweepAxis::CompressionRatio: return "compression_ratio";
  }
  return "unknown";
}

SweepAxis sweep_axis_from_string(std::string_view s) {
  if (s == "cycle_time") return SweepAxis::CycleTime;
  if (s == "dephasing") return SweepAxis::Dephasing;
  if (s == "compression_ratio") return SweepAxis::CompressionRatio;
  throw ConfigError("unknown sweep axis '" + std::string(s) +
                    "' (expected cycle_time, dephasing or compression_ratio)");
}

CycleSpec apply_sweep_value(const CycleSpec& tmpl, SweepAxis axis,
                            double value) {
  CycleSpec s = tmpl;
  switch (axis) {
    case SweepAxis::CycleTime:
      s = tmpl.with_cycle_time(to_atomic_time(value));
      break;
    case SweepAxis::Dephasing:
      if (!(value >= 0.0)) throw ConfigError("gamma_d must be non-negative");
      s.gamma_d = value;
      break;
    case SweepAxis::CompressionRatio: {
      // Keep omega3 and the template's corner ratios omega2/omega3 and
      // omega4/omega1; for a Carnot geometry this is the standard
      // construction.
      if (tmpl.kind == CycleKind::CarnotShortcut) {
        const auto g = carnot_corner_frequencies(tmpl.omega3, value,
                                                 tmpl.t_cold_bath, tmpl.t_hot_bath);
        s.omega1 = g.omega1;
        s.omega2 = g.omega2;
        s.omega4 = g.omega4;
      } else {
        s.omega1 = value * tmpl.omega3;
        s.omega2 = tmpl.omega3 * (tmpl.omega2 / tmpl.omega3);
        s.omega4 = s.omega1 * (tmpl.omega4 / tmpl.omega1);
      }
      if (s.kind == CycleKind::EndoGlobal) {
        // Preserve the template's cycle time.
        s = s.with_cycle_time(tmpl.cycle_time());
      }
      break;
    }
  }
  s.validate(false);
  return s;
}

std::vector<SweepRow> sweep(const CycleSpec& tmpl, SweepAxis axis,
                            std::span<const double> values,
                            const SweepOptions& options) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  std::vector<SweepRow> rows(values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < values.size(); i = next++) {
      SweepRow& row = rows[i];
      row.value = values[i];
      try {
        const CycleSpec spec = apply_sweep_value(tmpl, axis, values[i]);
        const CycleResult res = run_to_limit_cycle(spec, options.limit_cycle);
        row.iterations = res.iterations;
        row.ledger = analyze_cycle(res, spec);
      } catch (const Error& e) {
        row.error = std::string(e.name()) + ": " + e.what();
      } catch (const std::exception& e) {
        row.error = std::string("Error: ") + e.what();
      }
    }
  };
  const std::size_t jobs = std::clamp<std::size_t>(options.jobs, 1, values.size());
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return rows;
}

namespace {

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch == '\n' ? ' ' : ch;
  }
  return out + "\"";
}

}  // namespace

void write_sweep_csv(std::ostream& os, SweepAxis axis,
                     std::span<const SweepRow> rows) {
  os << "axis,value,cycle_time_units,cycle_time,total_work,q_hot,q_cold,power,"
        "efficiency,mode,iterations,bath_entropy_flow,w1,w2,w3,w4,"
        "corner_coherence_max,min_coherence,error\n";
  for (const auto& r : rows) {
    os << to_string(axis) << ',' << num(r.value);
    if (r.ledger) {
      const auto& L = *r.ledger;
      const double cmax = *std::max_element(L.corner_coherence.begin(),
                                            L.corner_coherence.end());
      os << ',' << num(to_reporting_time(L.cycle_time)) << ','
         << num(L.cycle_time) << ',' << num(L.total_work) << ','
         << num(L.q_hot) << ',' << num(L.q_cold) << ',' << num(L.power) << ','
         << num(L.efficiency) << ',' << to_string(L.operational_mode) << ','
         << r.iterations << ',' << num(L.bath_entropy_flow);
      for (double w : L.work_per_stroke) os << ',' << num(w);
      os << ',' << num(cmax) << ',' << num(L.min_coherence) << ",\n";
    } else {
      os << ",,,,,,,,,,,,,,,,," << csv_quote(r.error) << '\n';
    }
  }
}

nlohmann::json ledger_json(const CycleLedger& L) {
  auto finite_or_null = [](double x) -> nlohmann::json {
    if (std::isfinite(x)) return x;
    return nullptr;
  };
  return {{"work_per_stroke", L.work_per_stroke},
          {"heat_per_stroke", L.heat_per_stroke},
          {"energy_change", L.energy_change},
          {"total_work", L.total_work},
          {"q_hot", L.q_hot},
          {"q_cold", L.q_cold},
          {"power", L.power},
          {"efficiency", finite_or_null(L.efficiency)},
          {"cycle_time", L.cycle_time},
          {"cycle_time_units", to_reporting_time(L.cycle_time)},
          {"operational_mode", std::string(to_string(L.operational_mode))},
          {"bath_entropy_flow", L.bath_entropy_flow},
          {"corner_coherence", L.corner_coherence},
          {"min_coherence", L.min_coherence}};
}

std::string git_blob_hash(std::string_view content) {
  const std::string head = "blob " + std::to_string(content.size()) + '\0';
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr) throw NumericalError("cannot allocate a digest context");
  const bool ok = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, head.data(), head.size()) == 1 &&
                  EVP_DigestUpdate(ctx, content.data(), content.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, md, &len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw NumericalError("SHA-1 digest failed");
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

}  // namespace qcarnot
