#pragma once

// Scenario orchestration: run a configured reproduction, write its CSV/JSON
// outputs and summarize the headline numbers in a RunReport.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "afc.hpp"
#include "config.hpp"
#include "io.hpp"
#include "lgi.hpp"
#include "photon.hpp"
#include "quantum.hpp"
#include "stationarity.hpp"
#include "tomography.hpp"

namespace lgiecho {

struct RunReport {
  Scenario scenario = Scenario::LgiEnvelope;
  std::uint64_t seed = 0;
  std::string digest;
  double wall_time = 0;              // s; reported on stdout only
  std::vector<std::string> outputs;  // file names inside the output directory
  Json metrics = Json::object();
  std::string verdict;
};

/// JSON form of a report. Wall time is left out so the summary file is a
/// pure function of the configuration.
inline Json report_json(const RunReport& r) {
  Json j;
  j["scenario"] = to_string(r.scenario);
  j["version"] = kVersion;
  j["seed"] = r.seed;
  j["digest"] = r.digest;
  j["metrics"] = r.metrics;
  j["verdict"] = r.verdict;
  j["outputs"] = r.outputs;
  return j;
}

enum class ReportFormat { Json, Text };

inline std::string emit_report(const RunReport& r, ReportFormat format) {
  if (format == ReportFormat::Json) {
    Json j = report_json(r);
    j["wall_time"] = r.wall_time;
    return j.dump(2) + "\n";
  }
  std::string s;
  s += "scenario: " + to_string(r.scenario) + "\n";
  s += "seed: " + std::to_string(r.seed) + "\n";
  s += "digest: " + r.digest + "\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", r.wall_time);
  s += std::string("wall_time_s: ") + buf + "\n";
  for (const auto& [k, v] : r.metrics.items()) s += k + ": " + v.dump() + "\n";
  for (const auto& o : r.outputs) s += "output: " + o + "\n";
  s += r.verdict + "\n";
  return s;
}

namespace detail {

inline std::string fixed(double x, int digits) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

/// Scenario outputs held in memory until the run succeeds.
struct Outputs {
  std::vector<std::pair<std::string, std::string>> files;
  void add(std::string name, std::string content) { files.emplace_back(std::move(name), std::move(content)); }
};

inline bool want_csv(const ScenarioConfig& c) { return c.output.format != OutputFormat::Json; }
inline bool want_json(const ScenarioConfig& c) { return c.output.format != OutputFormat::Csv; }

inline std::string tau_label(double tau_ns) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", tau_ns);
  return buf;
}

// ---------------------------------------------------------------------------

inline std::vector<double> lgi_grid_ns(const ScenarioConfig& c) {
  if (!c.params.lgi_times_ns.empty()) return c.params.lgi_times_ns;
  std::vector<double> t;
  if (c.params.noiseless) {
    // 600 steps per oscillation period 1/delta.
    for (int k = 1; k < 600; ++k) t.push_back(to_ns(k / (600 * c.physics.detuning)));
  } else {
    for (int k = 2; k <= 10; ++k) t.push_back(12.5 * k);
  }
  return t;
}

inline void run_lgi_envelope(const ScenarioConfig& c, RunReport& rep, Outputs& out) {
  std::vector<double> times = lgi_grid_ns(c);
  const double probe = c.params.probe_time_ns;
  if (std::none_of(times.begin(), times.end(), [&](double t) { return std::abs(t - probe) < 1e-6; })) {
    times.push_back(probe);
    std::sort(times.begin(), times.end());
  }
  const ExcitationState ex{c.physics.detuning, c.physics.phase0, {"N1", "N2"}};
  const unsigned workers = c.statistics.workers;

  std::vector<LgiReport> rows;
  if (c.params.noiseless) {
    for (double t : times) rows.push_back(k_functionals(ex, t * 1e-9));
  } else {
    const CountingModel model = c.counting_model();
    // Setting 2k is K(0,t) at times[k], 2k+1 is K(0,2t).
    const auto expected = parallel_map(2 * times.size(), workers, [&](std::size_t s) {
      const double t = times[s / 2] * 1e-9 * (s % 2 ? 2.0 : 1.0);
      return model.expected(Level::D, Level::D, 0.0, t);
    });
    for (std::size_t k = 0; k < times.size(); ++k) {
      StreamRng r1(c.statistics.seed, 2 * k), r2(c.statistics.seed, 2 * k + 1);
      const CountPair a = sample_counts(expected[2 * k], r1);
      const CountPair b = sample_counts(expected[2 * k + 1], r2);
      rows.push_back(k_with_sigma(times[k] * 1e-9, a, b));
    }
  }

  std::size_t i_minus = 0, i_plus = 0, i_probe = 0;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    // Earliest minimum wins; K is mirror symmetric within a period.
    if (rows[k].k_minus < rows[i_minus].k_minus - 1e-12) i_minus = k;
    if (rows[k].k_plus < rows[i_plus].k_plus - 1e-12) i_plus = k;
    if (std::abs(times[k] - probe) < 1e-6) i_probe = k;
  }
  const auto& p = rows[i_probe];
  const auto am = k_minimum(LgiBranch::Minus, c.physics.detuning);
  const auto ap = k_minimum(LgiBranch::Plus, c.physics.detuning);
  auto& m = rep.metrics;
  m["mode"] = c.params.noiseless ? "noiseless" : to_string(c.statistics.counting);
  m["points"] = rows.size();
  m["min_k_minus"] = rows[i_minus].k_minus;
  m["t_min_k_minus_ns"] = times[i_minus];
  m["min_k_plus"] = rows[i_plus].k_plus;
  m["t_min_k_plus_ns"] = times[i_plus];
  m["analytic_min_k_minus"] = am.k_star;
  m["analytic_t_min_k_minus_ns"] = to_ns(am.t_star);
  m["analytic_min_k_plus"] = ap.k_star;
  m["analytic_t_min_k_plus_ns"] = to_ns(ap.t_star);
  m["probe_t_ns"] = probe;
  m["probe_k_t"] = p.k_t;
  m["probe_k_2t"] = p.k_2t;
  m["probe_k_minus"] = p.k_minus;
  m["probe_sigma_minus"] = p.sigma_minus;
  m["probe_violation_sigma_minus"] = p.violation_sigma_minus;
  m["probe_k_plus"] = p.k_plus;
  m["probe_sigma_plus"] = p.sigma_plus;
  m["probe_violation_sigma_plus"] = p.violation_sigma_plus;

  // Verdict on the branch that dips lower at the probe time.
  const bool plus = p.k_plus <= p.k_minus;
  const double k = plus ? p.k_plus : p.k_minus;
  const double s = plus ? p.sigma_plus : p.sigma_minus;
  const double sig = s > 0 ? (plus ? p.violation_sigma_plus : p.violation_sigma_minus)
                           : (k < -1 ? std::numeric_limits<double>::infinity() : 0.0);
  const std::string name = plus ? "k_plus" : "k_minus";
  if (k < -1 && sig >= 3)
    rep.verdict = "VIOLATION: " + name + "=" + fixed(k, 2) + " σ=" + fixed(s, 2) + " significance=" + fixed(sig, 1);
  else
    rep.verdict = "NO VIOLATION: " + name + "=" + fixed(k, 2) + " σ=" + fixed(s, 2) + " significance=" + fixed(sig, 1);

  const std::string id = to_string(c.scenario);
  if (want_csv(c)) {
    CsvWriter w(id, c.statistics.seed,
                {"t_ns", "k_t", "k_2t", "k_minus", "k_plus", "sigma_minus", "sigma_plus", "viol_sig_minus", "viol_sig_plus"});
    for (std::size_t k2 = 0; k2 < rows.size(); ++k2) {
      const auto& r = rows[k2];
      w.row({times[k2], r.k_t, r.k_2t, r.k_minus, r.k_plus, r.sigma_minus, r.sigma_plus, r.violation_sigma_minus,
             r.violation_sigma_plus});
    }
    out.add("lgi_envelope.csv", w.str());
  }
  if (want_json(c)) {
    Json arr = Json::array();
    for (std::size_t k2 = 0; k2 < rows.size(); ++k2) {
      const auto& r = rows[k2];
      arr.push_back({{"t_ns", times[k2]},
                     {"k_t", r.k_t},
                     {"k_2t", r.k_2t},
                     {"k_minus", r.k_minus},
                     {"k_plus", r.k_plus},
                     {"sigma_minus", r.sigma_minus},
                     {"sigma_plus", r.sigma_plus},
                     {"viol_sig_minus", r.violation_sigma_minus},
                     {"viol_sig_plus", r.violation_sigma_plus}});
    }
    out.add("lgi_envelope.json", Json{{"reports", arr}}.dump(2) + "\n");
  }
}

// ---------------------------------------------------------------------------

inline void run_stationarity_grid(const ScenarioConfig& c, RunReport& rep, Outputs& out) {
  const auto families = default_invariance_families();
  const auto& times_ns = c.params.invariance_times_ns;
  std::vector<double> times;
  for (double t : times_ns) times.push_back(t * 1e-9);

  // Closed-form grid: the largest spread of Q over t within any family.
  const ExcitationState ex{c.physics.detuning, c.physics.phase0, {"N1", "N2"}};
  double spread = 0;
  for (const auto& f : families) {
    const double q0 = conditional_probability(ex, f.i, f.j, times[0], times[0] + f.tau);
    for (double t : times) spread = std::max(spread, std::abs(conditional_probability(ex, f.i, f.j, t, t + f.tau) - q0));
  }

  const CountingModel model = c.counting_model();
  const auto expected = expected_grid(model, families, times, c.statistics.workers);
  const auto cells = sample_grid(expected, families, times, c.statistics.seed);
  const auto r = invariance_test(cells, c.statistics.alpha);

  auto& m = rep.metrics;
  m["counting"] = to_string(c.statistics.counting);
  m["families"] = families.size();
  m["times_per_family"] = times.size();
  m["noiseless_max_spread"] = spread;
  m["chi2"] = r.chi2;
  m["dof"] = r.dof;
  m["p_value"] = r.p_value;
  m["alpha"] = r.alpha;
  m["degenerate_families"] = r.degenerate_families;
  m["pass"] = r.pass;
  rep.verdict = std::string(r.pass ? "INVARIANT" : "NOT INVARIANT") + ": chi2=" + fixed(r.chi2, 2) +
                " dof=" + std::to_string(r.dof) + " p=" + fixed(r.p_value, 3);

  const std::string id = to_string(c.scenario);
  const std::size_t nt = times.size();
  if (want_csv(c)) {
    for (std::size_t f = 0; f < families.size(); ++f) {
      const auto& fam = families[f];
      const double tau_ns = to_ns(fam.tau);
      CsvWriter w(id, c.statistics.seed, {"tau_ns", "t_ns", "q_hat", "sigma"});
      for (std::size_t k = 0; k < nt; ++k) {
        const auto& e = r.grid[f * nt + k];
        w.row({tau_ns, times_ns[k], e.q_hat, e.sigma});
      }
      out.add(std::string("invariance_Q") + to_string(fam.i) + to_string(fam.j) + "_tau" + tau_label(tau_ns) + "ns.csv",
              w.str());
    }
  }
  if (want_json(c)) {
    Json grid = Json::array();
    for (std::size_t k = 0; k < r.grid.size(); ++k) {
      const auto& e = r.grid[k];
      grid.push_back({{"i", to_string(e.i)},
                      {"j", to_string(e.j)},
                      {"tau_ns", to_ns(e.tau)},
                      {"t_ns", times_ns[k % nt]},
                      {"n_target", cells[k].counts.n_target},
                      {"n_complement", cells[k].counts.n_complement},
                      {"q_hat", e.q_hat},
                      {"sigma", e.sigma},
                      {"boundary", e.boundary}});
    }
    Json j{{"grid", grid}, {"chi2", r.chi2}, {"dof", r.dof}, {"p_value", r.p_value}, {"alpha", r.alpha}, {"pass", r.pass}};
    out.add("invariance.json", j.dump(2) + "\n");
  }
}

// ---------------------------------------------------------------------------

inline void run_markovianity(const ScenarioConfig& c, RunReport& rep, Outputs& out) {
  const auto rho1 = DensityMatrix::pure(PolarState::D());  // H+V
  const auto rho2 = DensityMatrix::pure(PolarState::A());  // H-V
  std::vector<double> times;
  for (double t : c.params.markov_times_ns) times.push_back(t * 1e-9);
  MarkovianityOptions opts;
  opts.use_tomography = c.params.use_tomography;
  opts.shots = c.statistics.shots;
  opts.seed = c.statistics.seed;
  opts.bootstrap = c.statistics.bootstrap;
  opts.workers = c.statistics.workers;
  const auto r = markovianity_test(rho1, rho2, c.physics.channel, times, opts);
  std::vector<double> exact;
  for (double t : times)
    exact.push_back(trace_distance(apply_channel(c.physics.channel, rho1, t), apply_channel(c.physics.channel, rho2, t)));

  auto& m = rep.metrics;
  m["mode"] = opts.use_tomography ? "tomography" : "exact";
  m["channel"] = to_string(c.physics.channel.kind);
  m["rate"] = c.physics.channel.rate;
  m["points"] = times.size();
  m["first_distance"] = r.distances.front();
  m["last_distance"] = r.distances.back();
  m["max_increase"] = r.max_increase;
  m["threshold"] = r.threshold;
  m["pass"] = r.pass;
  rep.verdict = std::string(r.pass ? "MONOTONE" : "NOT MONOTONE") + ": max_increase=" + format_number(r.max_increase) +
                " threshold=" + format_number(r.threshold);

  const std::string id = to_string(c.scenario);
  if (want_csv(c)) {
    CsvWriter w(id, c.statistics.seed, {"t_ns", "distance", "sigma", "exact_distance"});
    for (std::size_t k = 0; k < times.size(); ++k)
      w.row({c.params.markov_times_ns[k], r.distances[k], r.sigmas.empty() ? 0.0 : r.sigmas[k], exact[k]});
    out.add("markovianity.csv", w.str());
  }
  if (want_json(c)) {
    Json j{{"times_ns", c.params.markov_times_ns},
           {"distances", r.distances},
           {"sigmas", r.sigmas},
           {"exact_distances", exact},
           {"max_increase", r.max_increase},
           {"threshold", r.threshold},
           {"pass", r.pass}};
    out.add("markovianity.json", j.dump(2) + "\n");
  }
}

// ---------------------------------------------------------------------------

/// Weighted least-squares slope of y against x.
inline double weighted_slope(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& sigma) {
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double w = sigma[k] > 0 ? 1 / (sigma[k] * sigma[k]) : 1.0;
    sw += w;
    sx += w * x[k];
    sy += w * y[k];
    sxx += w * x[k] * x[k];
    sxy += w * x[k] * y[k];
  }
  const double d = sw * sxx - sx * sx;
  return d > 0 ? (sw * sxy - sx * sy) / d : 0.0;
}

inline void run_g2_vs_storage(const ScenarioConfig& c, RunReport& rep, Outputs& out) {
  MemoryConfig mem = c.memory();
  mem.input = parse_polarization(c.params.g2_input, "params.g2_input");
  const auto analyzer = parse_polarization(c.params.g2_analyzer, "params.g2_analyzer");
  std::vector<double> taus;
  for (double t : c.params.storage_times_ns) taus.push_back(t * 1e-9);
  const auto points =
      g2_vs_storage(c.source, mem, analyzer, taus, c.statistics.trials_per_run, c.statistics.seed, c.statistics.workers);

  std::vector<double> xs, ys, ss;
  double transmitted = std::numeric_limits<double>::quiet_NaN();
  double min_stored = std::numeric_limits<double>::infinity(), max_stored = 0;
  double min_all = std::numeric_limits<double>::infinity();
  for (const auto& p : points) {
    min_all = std::min(min_all, p.g2.g2);
    if (p.storage_time == 0) {
      transmitted = p.g2.g2;
    } else {
      xs.push_back(to_ns(p.storage_time));
      ys.push_back(p.g2.g2);
      ss.push_back(p.g2.sigma);
      min_stored = std::min(min_stored, p.g2.g2);
      max_stored = std::max(max_stored, p.g2.g2);
    }
  }
  const double slope = xs.size() >= 2 ? weighted_slope(xs, ys, ss) : 0.0;

  auto& m = rep.metrics;
  m["trials_per_point"] = c.statistics.trials_per_run;
  for (const auto& p : points) m["g2_at_" + tau_label(to_ns(p.storage_time)) + "ns"] = p.g2.g2;
  m["transmitted_g2"] = transmitted;
  m["min_stored_g2"] = xs.empty() ? Json(nullptr) : Json(min_stored);
  m["max_stored_g2"] = xs.empty() ? Json(nullptr) : Json(max_stored);
  m["stored_slope_per_ns"] = slope;
  m["all_above_2"] = min_all > 2;
  m["heralded_autocorr_bound"] = heralded_autocorr_bound(xs.empty() ? min_all : min_stored);
  rep.verdict = std::string(min_all > 2 ? "NONCLASSICAL" : "CLASSICAL BOUND NOT EXCEEDED") +
                ": min g2=" + fixed(min_all, 1) + " (classical bound 2)";

  const std::string id = to_string(c.scenario);
  if (want_csv(c)) {
    CsvWriter w(id, c.statistics.seed, {"storage_ns", "g2", "sigma", "n_peak", "n_offset"});
    for (const auto& p : points)
      w.row({to_ns(p.storage_time), p.g2.g2, p.g2.sigma, static_cast<double>(p.g2.n_peak), static_cast<double>(p.g2.n_offset)});
    out.add("g2_vs_storage.csv", w.str());
    for (const auto& p : points)
      out.add("histogram_" + tau_label(to_ns(p.storage_time)) + "ns.csv", histogram_csv(p.histogram, id, c.statistics.seed));
  }
  if (want_json(c)) {
    Json arr = Json::array();
    for (const auto& p : points) {
      Json g = g2_json(p.g2);
      g["storage_ns"] = to_ns(p.storage_time);
      g["signal_window_ns"] = {to_ns(p.histogram.signal_window.start), to_ns(p.histogram.signal_window.end)};
      g["noise_window_ns"] = {to_ns(p.histogram.noise_window.start), to_ns(p.histogram.noise_window.end)};
      g["heralds"] = p.histogram.heralds;
      arr.push_back(g);
    }
    out.add("g2_vs_storage.json", Json{{"points", arr}}.dump(2) + "\n");
  }
}

// ---------------------------------------------------------------------------

inline void run_echo_trace(const ScenarioConfig& c, RunReport& rep, Outputs& out) {
  const unsigned workers = c.statistics.workers;
  const auto ensemble = sample_ensemble(c.physics.comb, c.physics.echo.atoms, c.physics.echo.seed);
  const auto trace = echo_trace(ensemble, c.params.echo_t_max_ns * 1e-9, c.params.echo_bin_ns * 1e-9, workers);
  const double tau = c.physics.comb.echo_time();
  const auto first = peak_shape(trace, tau, 0.25 * tau);
  const bool has_second = 2.25 * tau <= c.params.echo_t_max_ns * 1e-9;
  const PeakShape second = has_second ? peak_shape(trace, 2 * tau, 0.25 * tau) : PeakShape{};

  // Coincidence histogram of the same storage with polarization analysis.
  MemoryConfig mem = c.memory();
  mem.input = parse_polarization(c.params.echo_input, "params.echo_input");
  const auto analyzer = parse_polarization(c.params.echo_analyzer, "params.echo_analyzer");
  RunOptions ro;
  ro.workers = workers;
  const auto hist = simulate_run(c.source, mem, analyzer, c.statistics.trials_per_run, c.statistics.seed, ro);
  auto window_counts = [&](double center, double width) { return hist.window_count(hist.snap(center, width)); };

  auto& m = rep.metrics;
  m["atoms"] = c.physics.echo.atoms;
  m["echo_time_ns"] = to_ns(tau);
  m["first_echo_peak_ns"] = to_ns(first.time);
  m["first_echo_bin_start_ns"] = to_ns(first.time - 0.5 * trace.bin_width);
  m["first_echo_intensity"] = first.value;
  m["first_echo_fwhm_ns"] = to_ns(first.fwhm);
  m["second_echo_peak_ns"] = has_second ? Json(to_ns(second.time)) : Json(nullptr);
  m["second_echo_intensity"] = has_second ? Json(second.value) : Json(nullptr);
  m["second_to_first_ratio"] = has_second ? Json(second.value / first.value) : Json(nullptr);
  m["histogram_trials"] = hist.trials;
  m["histogram_heralds"] = hist.heralds;
  m["coincidences_transmitted_2ns"] = window_counts(0.0, 2e-9);
  m["coincidences_first_echo_10ns"] = window_counts(tau, 10e-9);
  m["coincidences_second_echo_10ns"] = window_counts(2 * tau, 10e-9);
  rep.verdict = "ECHO: peak at " + fixed(to_ns(first.time), 1) + " ns, FWHM " + fixed(to_ns(first.fwhm), 1) + " ns";

  const std::string id = to_string(c.scenario);
  if (want_csv(c)) {
    CsvWriter w(id, c.statistics.seed, {"time_ns", "intensity"});
    for (std::size_t i = 0; i < trace.times.size(); ++i) w.row({to_ns(trace.times[i]), trace.intensity[i]});
    out.add("echo_trace.csv", w.str());
    out.add("histogram.csv", histogram_csv(hist, id, c.statistics.seed));
  }
  if (want_json(c)) {
    std::vector<double> t_ns;
    for (double t : trace.times) t_ns.push_back(to_ns(t));
    Json j{{"bin_width_ns", to_ns(trace.bin_width)}, {"time_ns", t_ns}, {"intensity", trace.intensity}};
    std::vector<double> bins;
    for (std::size_t i = 0; i < hist.counts.size(); ++i) bins.push_back(to_ns(hist.bin_start(i)));
    j["histogram"] = {{"bin_start_ns", bins}, {"count", hist.counts}};
    out.add("echo_trace.json", j.dump(2) + "\n");
  }
}

// ---------------------------------------------------------------------------

inline void run_tomography_demo(const ScenarioConfig& c, RunReport& rep, Outputs& out) {
  const double phi = c.params.tomography_phi;
  const PolarState psi{Complex{std::cos(phi / 2)}, Complex{0, -std::sin(phi / 2)}, Basis::DA};
  const auto truth = DensityMatrix::pure(psi);
  const auto data = simulate_tomography(truth, c.statistics.shots, c.statistics.seed);
  const auto lin = linear_inversion(data);
  const auto mle = mle_reconstruct(data);

  auto& m = rep.metrics;
  m["phi"] = phi;
  m["shots_per_basis"] = c.statistics.shots;
  m["mle_trace_distance"] = trace_distance(mle.rho, truth);
  m["mle_fidelity"] = fidelity_pure(mle.rho, psi);
  m["mle_iterations"] = mle.iterations;
  m["mle_converged"] = mle.converged;
  m["mle_min_eigenvalue"] = mle.rho.eigenvalues()[0];
  m["linear_trace_distance"] = trace_distance(lin.rho, truth);
  m["linear_projected"] = lin.projected;
  rep.verdict = std::string(mle.converged ? "RECONSTRUCTED" : "NOT CONVERGED") +
                ": trace distance " + format_number(trace_distance(mle.rho, truth));

  const std::string id = to_string(c.scenario);
  if (want_csv(c)) out.add("tomography.csv", tomography_csv(data, id, c.statistics.seed));
  if (want_json(c)) {
    Json j = reconstruction_json(mle);
    j["true_rho"] = matrix_json(truth.hv());
    j["linear_inversion_rho"] = matrix_json(lin.rho.hv());
    j["linear_inversion_projected"] = lin.projected;
    out.add("reconstruction.json", j.dump(2) + "\n");
  }
}

}  // namespace detail

/// Runs the configured scenario and writes its outputs to
/// config.output.directory. On any failure the files written by this run are
/// removed and the error is rethrown with the scenario name prefixed.
inline RunReport run_scenario(const ScenarioConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  RunReport rep;
  rep.scenario = config.scenario;
  rep.seed = config.statistics.seed;
  rep.digest = config_digest(config);
  detail::Outputs out;
  try {
    switch (config.scenario) {
      case Scenario::LgiEnvelope: detail::run_lgi_envelope(config, rep, out); break;
      case Scenario::StationarityGrid: detail::run_stationarity_grid(config, rep, out); break;
      case Scenario::Markovianity: detail::run_markovianity(config, rep, out); break;
      case Scenario::G2VsStorage: detail::run_g2_vs_storage(config, rep, out); break;
      case Scenario::EchoTrace: detail::run_echo_trace(config, rep, out); break;
      case Scenario::TomographyDemo: detail::run_tomography_demo(config, rep, out); break;
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const EstimationError& e) {
    throw EstimationError(to_string(config.scenario) + ": " + e.what());
  } catch (const std::exception& e) {
    throw std::runtime_error(to_string(config.scenario) + ": " + e.what());
  }

  OutputDirectory dir(config.output.directory);
  try {
    for (const auto& [name, content] : out.files) {
      dir.write(name, content);
      rep.outputs.push_back(name);
    }
    rep.outputs.push_back("summary.json");
    dir.write("summary.json", report_json(rep).dump(2) + "\n");
  } catch (...) {
    dir.rollback();
    throw;
  }
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

}  // namespace lgiecho
