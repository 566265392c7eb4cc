// Scenario runner: one subcommand per model, JSON config with flag overrides,
// CSV/JSON outputs plus a manifest that can be fed back as --config.

#include "decoherence/decoherence.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>
#include <map>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace decoherence;

namespace {

#ifndef DECOHERENCE_VERSION
#define DECOHERENCE_VERSION "0.0.0"
#endif

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Kind { number, integer, boolean, text, numbers };

struct Field {
  std::string name;
  Kind kind;
  json fallback;
  std::string help;
};

class Run;
struct Command {
  std::string name;
  std::string help;
  std::vector<Field> fields;
  std::function<void(Run&)> body;
};

const char* kind_name(Kind k) {
  switch (k) {
    case Kind::number: return "a number";
    case Kind::integer: return "an integer";
    case Kind::boolean: return "true or false";
    case Kind::text: return "a string";
    case Kind::numbers: return "a list of numbers";
  }
  return "";
}

bool matches(Kind k, const json& v) {
  switch (k) {
    case Kind::number: return v.is_number();
    case Kind::integer: return v.is_number_integer();
    case Kind::boolean: return v.is_boolean();
    case Kind::text: return v.is_string();
    case Kind::numbers:
      if (!v.is_array()) return false;
      for (const auto& x : v) {
        if (!x.is_number()) return false;
      }
      return true;
  }
  return false;
}

// Flag text -> JSON value of the field's type.
json from_flag(const Field& f, const std::string& s) {
  try {
    switch (f.kind) {
      case Kind::number: return io::parse_double(s);
      case Kind::integer: {
        std::size_t used = 0;
        const long long v = std::stoll(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
      }
      case Kind::boolean:
        if (s == "true" || s == "1") return true;
        if (s == "false" || s == "0") return false;
        throw std::invalid_argument(s);
      case Kind::text: return s;
      case Kind::numbers: {
        json arr = json::array();
        std::stringstream ss(s);
        std::string item;
        while (std::getline(ss, item, ',')) arr.push_back(io::parse_double(item));
        return arr;
      }
    }
  } catch (const std::exception&) {
  }
  throw ConfigError("field '" + f.name + "': expected " + kind_name(f.kind) + ", got '" + s + "'");
}

const std::vector<Field> kCommon = {
    {"out", Kind::text, "", "output directory (default: out/<command>)"},
    {"seed", Kind::integer, 0, "master seed"},
    {"threads", Kind::integer, 0, "worker threads; 0 uses DECOHERENCE_THREADS or the core count"},
};

class Run {
 public:
  Run(std::string command, json cfg) : command_(std::move(command)), cfg_(std::move(cfg)) {
    const std::string out = cfg_["out"].get<std::string>();
    dir_ = out.empty() ? fs::path("out") / command_ : fs::path(out);
  }

  double num(const std::string& k) const { return cfg_.at(k).get<double>(); }
  long long integer(const std::string& k) const { return cfg_.at(k).get<long long>(); }
  std::size_t count(const std::string& k, long long min = 0) const {
    const long long v = integer(k);
    if (v < min) throw ConfigError("field '" + k + "': must be at least " + std::to_string(min));
    return static_cast<std::size_t>(v);
  }
  bool flag(const std::string& k) const { return cfg_.at(k).get<bool>(); }
  std::string text(const std::string& k) const { return cfg_.at(k).get<std::string>(); }
  std::vector<double> list(const std::string& k) const { return cfg_.at(k).get<std::vector<double>>(); }
  std::size_t workers() const {
    const std::size_t t = count("threads");
    return t == 0 ? default_worker_count() : t;
  }
  std::uint64_t seed() const { return static_cast<std::uint64_t>(integer("seed")); }
  const json& config() const { return cfg_; }

  void write(const std::string& name, const std::string& contents) {
    io::write_atomic(dir_ / name, contents);
    outputs_.push_back(name);
  }
  void write(const std::string& name, const io::CsvTable& t) { write(name, t.str()); }

  void manifest(double wall_time) {
    json m;
    m["manifest-version"] = 1;
    m["command"] = command_;
    json c = cfg_;
    c["command"] = command_;
    m["config"] = c;
    m["seed"] = cfg_["seed"];
    m["versions"] = {{"decoherence", DECOHERENCE_VERSION},
                     {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                   std::to_string(EIGEN_MINOR_VERSION)},
                     {"cli11", CLI11_VERSION},
                     {"nlohmann-json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
    m["wall-time-s"] = wall_time;
    m["outputs"] = outputs_;
    io::write_atomic(dir_ / "manifest.json", m.dump(2) + "\n");
  }

  const fs::path& dir() const { return dir_; }

 private:
  std::string command_;
  json cfg_;
  fs::path dir_;
  std::vector<std::string> outputs_;
};

using Cell = io::CsvTable;

// ---------------------------------------------------------------------------
// shared helpers

StateVector named_qubit(const std::string& s) {
  if (s == "zero") return ket0();
  if (s == "one") return ket1();
  if (s == "plus") return ket_plus();
  if (s == "minus") return ket_minus();
  throw ConfigError("field 'initial': expected zero, one, plus or minus, got '" + s + "'");
}

Matrix qubit_hamiltonian(const Run& r) { return 0.5 * (r.num("h-x") * pauli::X() + r.num("h-z") * pauli::Z()); }

std::vector<double> time_grid(double t_final, std::size_t n) {
  if (n < 2) throw ConfigError("field 'n-times': must be at least 2");
  std::vector<double> t(n);
  for (std::size_t k = 0; k < n; ++k) t[k] = t_final * static_cast<double>(k) / static_cast<double>(n - 1);
  return t;
}

RealVector to_real(const std::vector<double>& v) {
  return Eigen::Map<const RealVector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

double min_eigenvalue(const Matrix& rho) { return hermitian_eigenvalues(rho).minCoeff(); }

Cell matrix_csv(const Matrix& m) {
  Cell t({"row", "col", "re", "im"});
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      t.add_row({Cell::cell(static_cast<std::size_t>(i)), Cell::cell(static_cast<std::size_t>(j)), Cell::cell(m(i, j).real()),
                 Cell::cell(m(i, j).imag())});
    }
  }
  return t;
}

Cell qubit_series_csv(const std::vector<double>& times, const std::vector<Matrix>& states) {
  Cell t({"t", "rho00", "rho11", "re_rho01", "im_rho01", "purity", "min_eigenvalue"});
  for (std::size_t k = 0; k < times.size(); ++k) {
    const Matrix& r = states[k];
    t.add_row({Cell::cell(times[k]), Cell::cell(r(0, 0).real()), Cell::cell(r(1, 1).real()), Cell::cell(r(0, 1).real()),
               Cell::cell(r(0, 1).imag()), Cell::cell(purity(r)), Cell::cell(min_eigenvalue(r))});
  }
  return t;
}

EvolveOptions evolve_options(const Run& r) {
  EvolveOptions opt;
  opt.store_every = r.count("store-every", 1);
  return opt;
}

// ---------------------------------------------------------------------------
// subcommands

void run_evolve(Run& r) {
  std::vector<LindbladTerm> terms;
  if (r.num("dephasing-rate") != 0.0) terms.push_back({pauli::Z(), r.num("dephasing-rate")});
  if (r.num("damping-rate") != 0.0) terms.push_back({pauli::lowering(), r.num("damping-rate")});
  const LindbladSpec spec(qubit_hamiltonian(r), terms);
  const auto series = evolve(spec, DensityMatrix::pure(named_qubit(r.text("initial"))), r.num("t-final"), r.num("dt"),
                             evolve_options(r));
  for (const auto& w : series.warnings) std::cerr << "warning: " << w << "\n";
  r.write("evolve.csv", qubit_series_csv(series.times, series.states));
  r.write("rho_final.csv", matrix_csv(series.states.back()));
  std::printf("final purity %.6f\n", purity(series.states.back()));
}

void run_trajectories(Run& r) {
  std::vector<LindbladTerm> terms;
  if (r.num("dephasing-rate") != 0.0) terms.push_back({pauli::Z(), r.num("dephasing-rate")});
  const LindbladSpec spec(qubit_hamiltonian(r), terms);
  const StateVector psi0 = named_qubit(r.text("initial"));
  TrajectoryConfig cfg;
  cfg.dt = r.num("dt");
  cfg.t_final = r.num("t-final");
  cfg.n_trajectories = r.count("n-trajectories", 1);
  cfg.master_seed = r.seed();
  cfg.store_every = r.count("store-every", 1);
  cfg.workers = r.workers();
  const auto res = unravel(spec, psi0, cfg);
  EvolveOptions opt;
  opt.store_every = cfg.store_every;
  const auto ref = evolve(spec, DensityMatrix::pure(psi0), cfg.t_final, cfg.dt, opt);
  Cell t({"t", "rho00", "rho11", "re_rho01", "im_rho01", "purity", "trace_distance_lindblad"});
  for (std::size_t k = 0; k < res.times.size(); ++k) {
    const Matrix& m = res.mean_states[k];
    t.add_row({Cell::cell(res.times[k]), Cell::cell(m(0, 0).real()), Cell::cell(m(1, 1).real()), Cell::cell(m(0, 1).real()),
               Cell::cell(m(0, 1).imag()), Cell::cell(purity(m)), Cell::cell(trace_distance(m, ref.states[k]))});
  }
  r.write("trajectories.csv", t);
  std::printf("trace distance to Lindblad at t_final %.3e\n", trace_distance(res.mean_states.back(), ref.states.back()));
}

ScatteringRegime parse_regime(const std::string& s) {
  if (s == "full") return ScatteringRegime::full;
  if (s == "short-wavelength") return ScatteringRegime::short_wavelength;
  if (s == "long-wavelength") return ScatteringRegime::long_wavelength;
  throw ConfigError("field 'regime': expected full, short-wavelength or long-wavelength");
}

void run_collisional(Run& r) {
  auto model = ScatteringModel::thermal_gas(r.num("density"), r.num("mass"), r.num("temperature"), r.num("cross-section"));
  const auto rates = decoherence_rates(model);
  Cell t({"dx", "localization_rate", "rate_over_gamma_tot", "lambda_dx2"});
  for (double dx : r.list("dx")) {
    const double f = localization_rate(model, dx);
    t.add_row({Cell::cell(dx), Cell::cell(f), Cell::cell(f / rates.gamma_tot), Cell::cell(rates.lambda * dx * dx)});
  }
  r.write("collisional_rates.csv", t);
  std::printf("gamma_tot %.6e  lambda %.6e\n", rates.gamma_tot, rates.lambda);
  const auto times = r.list("times");
  if (times.empty()) return;
  model.regime = parse_regime(r.text("regime"));
  const double d = r.num("separation"), sigma = r.num("packet-width");
  const double half = d / 2 + 6 * sigma;
  RealVector x = RealVector::LinSpaced(static_cast<Eigen::Index>(r.count("grid-points", 3)), -half, half);
  const GridState s = GridState::from_wavefunction(x, gaussian_packet(x, -d / 2, sigma) + gaussian_packet(x, d / 2, sigma));
  const double n0 = interference_norm(s);
  Cell g({"t", "interference_norm", "relative"});
  for (double tt : times) {
    const double n = interference_norm(evolve_collisional(s, model, tt));
    g.add_row({Cell::cell(tt), Cell::cell(n), Cell::cell(n / n0)});
  }
  r.write("collisional_grid.csv", g);
}

void run_qbm(Run& r) {
  CaldeiraLeggettParams p;
  p.mass = r.num("mass");
  p.omega = r.num("omega");
  p.gamma0 = r.num("gamma0");
  p.cutoff = r.num("cutoff");
  p.temperature = r.num("temperature");
  p.n_max = r.count("n-max");
  p.pure_decoherence = r.flag("pure-decoherence");
  const CaldeiraLeggett cl(p);
  const std::size_t levels = cl.levels();
  const std::string init = r.text("initial");
  StateVector psi0 = fock_state(0, levels);
  if (init == "cat") {
    psi0 = StateVector::normalized(coherent_state(r.num("alpha"), levels).amplitudes() +
                                       coherent_state(-r.num("alpha"), levels).amplitudes(),
                                   {levels});
  } else if (init == "coherent") {
    psi0 = coherent_state(r.num("alpha"), levels);
  } else if (init == "fock") {
    psi0 = fock_state(r.count("fock-n"), levels);
  } else {
    throw ConfigError("field 'initial': expected cat, coherent or fock");
  }
  EvolveOptions opt = evolve_options(r);
  opt.positivity_every = r.count("positivity-every", 1);
  const auto run = evolve_caldeira_leggett(cl, DensityMatrix::pure(psi0), r.num("t-final"), r.num("dt"), opt);
  const Matrix x = cl.x(), h = cl.hamiltonian();
  const Matrix x2 = x * x;
  Cell t({"t", "energy", "purity", "x_mean", "x2_mean", "tail_population"});
  for (std::size_t k = 0; k < run.series.times.size(); ++k) {
    const Matrix& rho = run.series.states[k];
    t.add_row({Cell::cell(run.series.times[k]), Cell::cell((h * rho).trace().real()), Cell::cell(purity(rho)),
               Cell::cell((x * rho).trace().real()), Cell::cell((x2 * rho).trace().real()),
               Cell::cell(cl.tail_population(rho))});
  }
  r.write("qbm.csv", t);
  r.write("rho_final.csv", matrix_csv(run.series.states.back()));
  if (!run.truncation_certified) {
    std::cerr << "warning: Fock truncation not certified (max tail population " << run.max_tail_population << ")\n";
  }
  const std::size_t every = r.count("wigner-every");
  if (every == 0) return;
  const double xmax = r.num("x-max");
  RealVector xg = RealVector::LinSpaced(static_cast<Eigen::Index>(r.count("x-points", 3)), -xmax, xmax);
  const RealVector pg = wigner_full_momentum_grid(xg(1) - xg(0), r.count("p-points", 2));
  Cell frames({"frame", "t", "file", "normalization", "negativity_volume"});
  for (std::size_t k = 0; k < run.series.states.size(); k += every) {
    const WignerGrid w = wigner_transform(oscillator_to_grid(run.series.states[k], p.mass, p.omega, xg), pg);
    Cell wt({"x", "p", "w"});
    for (Eigen::Index i = 0; i < w.x.size(); ++i) {
      for (Eigen::Index m = 0; m < w.p.size(); ++m) wt.add_row({Cell::cell(w.x(i)), Cell::cell(w.p(m)), Cell::cell(w.w(i, m))});
    }
    const std::string name = "wigner_" + std::to_string(k) + ".csv";
    r.write(name, wt);
    frames.add_row({Cell::cell(k), Cell::cell(run.series.times[k]), name, Cell::cell(w.normalization),
                    Cell::cell(w.negativity_volume())});
  }
  r.write("wigner_frames.csv", frames);
}

void run_spinboson(Run& r) {
  const auto j = SpectralDensity::ohmic(r.num("mass"), r.num("gamma0"), r.num("cutoff"));
  const double temp = r.num("temperature"), delta0 = r.num("delta0"), omega0 = r.num("omega0");
  const auto times = time_grid(r.num("t-final"), r.count("n-times"));
  DephasingConfig dc;
  dc.n_osc = r.count("n-osc", 1);
  RealVector exact = RealVector::Constant(static_cast<Eigen::Index>(times.size()), std::numeric_limits<double>::quiet_NaN());
  if (delta0 == 0.0) exact = spin_boson_exact_dephasing(j, temp, to_real(times), dc).coherence;
  const auto c = spin_boson_coefficients(j, temp, delta0);
  const SpinBosonBornMarkov gen(omega0, delta0, c);
  const std::size_t sub = r.count("substeps", 1);
  const double dt = times[1] / static_cast<double>(sub);
  EvolveOptions opt;
  opt.store_every = sub;
  const StateVector psi0 = named_qubit(r.text("initial"));
  const Matrix rho0 = psi0.amplitudes() * psi0.amplitudes().adjoint();
  const auto series = evolve_generator(gen, rho0, times.back(), dt, opt);
  Cell t({"t", "exact_coherence", "born_markov_coherence", "born_markov_rho00"});
  const double c0 = std::abs(rho0(0, 1));
  for (std::size_t k = 0; k < times.size(); ++k) {
    const Matrix& s = series.states[k];
    t.add_row({Cell::cell(times[k]), Cell::cell(exact(static_cast<Eigen::Index>(k))),
               Cell::cell(c0 > 0 ? std::abs(s(0, 1)) / c0 : std::numeric_limits<double>::quiet_NaN()),
               Cell::cell(s(0, 0).real())});
  }
  r.write("spinboson.csv", t);
  std::printf("D-tilde %.6e  f-tilde %.6e  gamma-tilde %.6e\n", c.dephasing, c.decay_real, c.decay_imag);
}

SpinEnvironment spin_environment(const Run& r) {
  const auto g = r.list("couplings");
  if (g.empty()) throw ConfigError("field 'couplings': at least one environment spin is required");
  return SpinEnvironment::uniform(to_real(g), r.num("delta0"), r.num("omega0"));
}

void run_spinspin(Run& r) {
  const auto times = time_grid(r.num("t-final"), r.count("n-times"));
  const auto tr = spin_spin_exact(spin_environment(r), bloch_state(r.num("theta"), r.num("phi")), to_real(times));
  Cell t({"t", "rho00", "rho11", "re_rho01", "im_rho01", "purity", "decoherence_factor"});
  for (std::size_t k = 0; k < times.size(); ++k) {
    const Matrix& m = tr.reduced[k];
    const double f = tr.decoherence_factor.size() ? tr.decoherence_factor(static_cast<Eigen::Index>(k))
                                                  : std::numeric_limits<double>::quiet_NaN();
    t.add_row({Cell::cell(times[k]), Cell::cell(m(0, 0).real()), Cell::cell(m(1, 1).real()), Cell::cell(m(0, 1).real()),
               Cell::cell(m(0, 1).imag()), Cell::cell(purity(m)), Cell::cell(f)});
  }
  r.write("spinspin.csv", t);
}

void run_sieve(Run& r) {
  const auto times = time_grid(r.num("t-final"), r.count("n-times"));
  const std::string model = r.text("model");
  ReducedDynamics dyn;
  if (model == "spinspin") {
    dyn = spin_spin_dynamics(spin_environment(r));
  } else if (model == "dephasing-qubit") {
    dyn = lindblad_dynamics(LindbladSpec(qubit_hamiltonian(r), {{pauli::Z(), r.num("dephasing-rate")}}), r.num("dt"));
  } else {
    throw ConfigError("field 'model': expected spinspin or dephasing-qubit");
  }
  const std::string m = r.text("measure");
  if (m != "purity" && m != "entropy") throw ConfigError("field 'measure': expected purity or entropy");
  const double pi = std::numbers::pi;
  const std::vector<std::pair<std::string, StateVector>> cands = {
      {"z+", ket0()},  {"z-", ket1()}, {"x+", ket_plus()}, {"x-", ket_minus()}, {"y+", bloch_state(pi / 2, pi / 2)},
      {"y-", bloch_state(pi / 2, -pi / 2)}};
  const auto rep = predictability_sieve(dyn, cands, times, m == "purity" ? SieveMeasure::purity : SieveMeasure::entropy,
                                        r.workers());
  Cell rank({"rank", "label", "purity", "entropy_bits"});
  for (std::size_t k = 0; k < rep.ranking.size(); ++k) {
    const auto& c = rep.candidates[rep.ranking[k]];
    rank.add_row({Cell::cell(k + 1), c.label, Cell::cell(c.purity.back()), Cell::cell(c.entropy.back())});
  }
  r.write("sieve.csv", rank);
  std::vector<std::string> header = {"t"};
  for (const auto& c : rep.candidates) header.push_back("purity_" + c.label);
  Cell series(header);
  for (std::size_t k = 0; k < rep.times.size(); ++k) {
    std::vector<std::string> row = {Cell::cell(rep.times[k])};
    for (const auto& c : rep.candidates) row.push_back(Cell::cell(c.purity[k]));
    series.add_row(row);
  }
  r.write("sieve_series.csv", series);
  std::printf("most predictable: %s\n", rep.best().label.c_str());
}

void run_dfs(Run& r) {
  const std::size_t n = r.count("n", 1);
  json out;
  out["n"] = n;
  if (r.flag("collective")) {
    const auto rep = collective_dfs(n);
    out["coupling"] = "collective";
    out["dimension"] = rep.dimension;
    out["encodable-qubits"] = rep.encodable_qubits;
    out["stirling-bits"] = rep.stirling_bits;
    out["magnetization"] = rep.magnetization;
    out["odd-n-fallback"] = rep.odd_n_fallback;
    out["labels"] = rep.labels;
    std::printf("dimension %llu\n", static_cast<unsigned long long>(rep.dimension));
    for (const auto& l : rep.labels) std::printf("%s\n", l.c_str());
  } else {
    if (n > 10) throw ConfigError("field 'n': independent couplings are searched densely, n <= 10");
    SplitMix64 rng(r.seed());
    std::vector<InteractionTerm> terms;
    for (std::size_t j = 0; j < n; ++j) terms.push_back({embed(pauli::Z(), j, Dims(n, 2)), random_hermitian(2, rng)});
    const DFSResult found = dfs_find(InteractionSpec(terms));
    out["coupling"] = "independent";
    out["dimension"] = found.dimension;
    json basis = json::array();
    for (const auto& b : found.basis) {
      json v = json::array();
      for (Eigen::Index i = 0; i < b.amplitudes().size(); ++i) v.push_back({b[i].real(), b[i].imag()});
      basis.push_back(v);
    }
    out["basis"] = basis;
    std::printf("dimension %zu\n", found.dimension);
  }
  r.write("dfs.json", out.dump(2) + "\n");
}

void run_qec(Run& r) {
  Cell t({"p", "logical_error_rate_uncorrected", "logical_error_rate_corrected", "n_shots"});
  for (double p : r.list("p")) {
    const auto res = monte_carlo_logical_error(p, r.count("shots", 1), r.seed(), r.workers());
    t.add_row({Cell::cell(p), Cell::cell(res.uncorrected), Cell::cell(res.corrected), Cell::cell(res.shots)});
  }
  r.write("qec.csv", t);
}

void run_estimate(Run& r) {
  const std::string mode = r.text("mode");
  if (mode == "ratio") {
    std::optional<double> rate;
    if (r.num("relaxation-rate-s") > 0.0) rate = r.num("relaxation-rate-s");
    const auto rep = timescale_ratio(r.num("mass-g") * 1e-3, r.num("temp-K"), r.num("dx-cm") * 1e-2, rate);
    Cell t({"mass_g", "temperature_K", "dx_cm", "lambda_dB_m", "ratio", "tau_r_s", "tau_d_s"});
    t.add_row({Cell::cell(r.num("mass-g")), Cell::cell(r.num("temp-K")), Cell::cell(r.num("dx-cm")), Cell::cell(rep.lambda_dB),
               Cell::cell(rep.ratio), Cell::cell(rep.tau_r), Cell::cell(rep.tau_d)});
    r.write("estimate.csv", t);
    std::printf("tau_r/tau_d = %.3e\n", rep.ratio);
  } else if (mode == "table1") {
    auto entries = table1_template();
    const auto lam = r.list("table1-lambda"), gam = r.list("table1-gamma");
    for (const auto* v : {&lam, &gam}) {
      if (!v->empty() && v->size() != entries.size()) {
        throw ConfigError(std::string("field '") + (v == &lam ? "table1-lambda" : "table1-gamma") + "': expected " +
                          std::to_string(entries.size()) + " entries");
      }
    }
    bool complete = !lam.empty() || !gam.empty();
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (!lam.empty() && lam[i] > 0.0) entries[i].lambda_cm2_s = lam[i];
      if (!gam.empty() && gam[i] > 0.0) entries[i].gamma_tot_s = gam[i];
      complete = complete && (entries[i].lambda_cm2_s || entries[i].gamma_tot_s);
    }
    Cell t({"environment", "object", "dx_cm", "tau_d_s", "reference_s", "regime"});
    if (complete) {
      for (const auto& row : table1_scenarios(entries)) {
        t.add_row({Cell::cell(row.environment), Cell::cell(row.object), Cell::cell(row.dx_cm), Cell::cell(row.tau_d_s),
                   Cell::cell(row.reference_s), row.regime});
      }
    } else {
      // reference orders of magnitude only; no scattering constants supplied
      for (const auto& e : entries) {
        t.add_row({Cell::cell(e.environment), Cell::cell(e.object), Cell::cell(e.dx_cm),
                   Cell::cell(std::numeric_limits<double>::quiet_NaN()), Cell::cell(e.reference_s), "reference-only"});
      }
      std::printf("no scattering constants given: tabulated reference timescales only\n");
    }
    r.write("table1.csv", t);
    std::cout << t.str();
  } else if (mode == "visibility") {
    const auto curve = visibility_vs_pressure(r.num("gamma-per-pressure"), r.num("transit-time-s"), r.list("pressures-Pa"),
                                              r.num("v0"));
    Cell t({"pressure_Pa", "visibility"});
    for (const auto& p : curve) t.add_row({Cell::cell(p.pressure), Cell::cell(p.visibility)});
    r.write("visibility.csv", t);
  } else {
    throw ConfigError("field 'mode': expected ratio, table1 or visibility");
  }
}

std::vector<Command> commands() {
  const json none = json::array();
  const std::vector<Field> qubit = {
      {"h-x", Kind::number, 0.0, "H = (h_x sx + h_z sz)/2, energy units"},
      {"h-z", Kind::number, 0.0, "see h-x"},
      {"dephasing-rate", Kind::number, 1.0, "kappa for L = sz, 1/time"},
      {"initial", Kind::text, "plus", "zero, one, plus or minus"},
      {"t-final", Kind::number, 1.0, "time"},
      {"dt", Kind::number, 1e-3, "time step"},
      {"store-every", Kind::integer, 10, "steps between stored rows"},
  };
  auto with = [](std::vector<Field> base, std::vector<Field> extra) {
    base.insert(base.end(), extra.begin(), extra.end());
    return base;
  };
  const std::vector<Field> spins = {
      {"couplings", Kind::numbers, json::array({1.0, 1.0, 1.0, 1.0}), "g_i of each environment spin, energy units"},
      {"delta0", Kind::number, 0.0, "tunnelling Delta0, energy units"},
      {"omega0", Kind::number, 0.0, "level splitting omega0, energy units"},
      {"t-final", Kind::number, 6.0, "time"},
      {"n-times", Kind::integer, 121, "number of output times"},
  };
  return {
      {"evolve", "Lindblad evolution of a qubit", with(qubit, {{"damping-rate", Kind::number, 0.0, "kappa for L = sigma_-, 1/time"}}),
       run_evolve},
      {"trajectories", "diffusive unraveling of the dephasing qubit",
       with(qubit, {{"n-trajectories", Kind::integer, 1000, "ensemble size"}}), run_trajectories},
      {"collisional",
       "scattering-induced localization in a thermal gas (hbar = k_B = 1)",
       {{"density", Kind::number, 1.0, "gas number density, 1/length^3"},
        {"mass", Kind::number, 1.0, "gas particle mass"},
        {"temperature", Kind::number, 1.0, "gas temperature, energy units"},
        {"cross-section", Kind::number, 1.0, "total cross-section, length^2"},
        {"dx", Kind::numbers, json::array({0.01, 0.1, 1.0, 10.0}), "separations, length"},
        {"regime", Kind::text, "long-wavelength", "full, short-wavelength or long-wavelength (grid run)"},
        {"separation", Kind::number, 2.0, "packet separation for the grid run, length"},
        {"packet-width", Kind::number, 0.05, "packet width, length"},
        {"grid-points", Kind::integer, 401, "grid points"},
        {"times", Kind::numbers, none, "times for the grid run (empty skips it)"}},
       run_collisional},
      {"qbm",
       "Caldeira-Leggett oscillator in the Fock basis, with Wigner dumps",
       {{"mass", Kind::number, 1.0, "oscillator mass"},
        {"omega", Kind::number, 1.0, "bare frequency"},
        {"gamma0", Kind::number, 0.01, "relaxation rate, 1/time"},
        {"cutoff", Kind::number, 1.0, "bath cutoff, frequency"},
        {"temperature", Kind::number, 10.0, "energy units"},
        {"n-max", Kind::integer, 60, "highest Fock level"},
        {"pure-decoherence", Kind::boolean, false, "drop the friction term"},
        {"initial", Kind::text, "cat", "cat, coherent or fock"},
        {"alpha", Kind::number, 2.0, "coherent amplitude"},
        {"fock-n", Kind::integer, 0, "Fock level for initial = fock"},
        {"t-final", Kind::number, 1.0, "time"},
        {"dt", Kind::number, 1e-3, "time step"},
        {"store-every", Kind::integer, 10, "steps between stored rows"},
        {"positivity-every", Kind::integer, 10, "steps between positivity checks"},
        {"wigner-every", Kind::integer, 0, "Wigner dump every k-th stored frame (0: none)"},
        {"x-max", Kind::number, 8.0, "Wigner grid half width, length"},
        {"x-points", Kind::integer, 161, "Wigner position points"},
        {"p-points", Kind::integer, 320, "Wigner momentum points"}},
       run_qbm},
      {"spinboson",
       "spin-boson dephasing: exact (Delta0 = 0) and Born-Markov",
       {{"mass", Kind::number, 1.0, "bath mass parameter"},
        {"gamma0", Kind::number, 1e-3, "ohmic coupling, 1/time"},
        {"cutoff", Kind::number, 1.0, "bath cutoff, frequency"},
        {"temperature", Kind::number, 2.5, "energy units"},
        {"delta0", Kind::number, 0.0, "tunnelling, energy units"},
        {"omega0", Kind::number, 0.0, "level splitting, energy units"},
        {"initial", Kind::text, "plus", "zero, one, plus or minus"},
        {"t-final", Kind::number, 50.0, "time"},
        {"n-times", Kind::integer, 201, "number of output times"},
        {"substeps", Kind::integer, 20, "integrator steps per output interval"},
        {"n-osc", Kind::integer, 512, "bath oscillators in the exact solution"}},
       run_spinboson},
      {"spinspin", "central spin coupled to environment spins",
       with(spins, {{"theta", Kind::number, std::numbers::pi / 2, "initial Bloch polar angle, rad"},
                    {"phi", Kind::number, 0.0, "initial Bloch azimuth, rad"}}),
       run_spinspin},
      {"sieve", "predictability sieve over the six cardinal qubit states",
       with(spins, {{"model", Kind::text, "spinspin", "spinspin or dephasing-qubit"},
                    {"measure", Kind::text, "purity", "purity or entropy"},
                    {"dephasing-rate", Kind::number, 1.0, "dephasing-qubit: kappa, 1/time"},
                    {"h-x", Kind::number, 0.0, "dephasing-qubit: H = (h_x sx + h_z sz)/2"},
                    {"h-z", Kind::number, 0.0, "dephasing-qubit: see h-x"},
                    {"dt", Kind::number, 1e-3, "dephasing-qubit: time step"}}),
       run_sieve},
      {"dfs",
       "decoherence-free subspace search",
       {{"collective", Kind::boolean, true, "collective sz coupling (false: independent couplings)"},
        {"n", Kind::integer, 4, "number of qubits"}},
       run_dfs},
      {"qec",
       "3-qubit phase-flip code under independent flips",
       {{"p", Kind::numbers, json::array({0.01, 0.02, 0.05}), "flip probabilities"},
        {"shots", Kind::integer, 100000, "Monte Carlo shots per p"}},
       run_qec},
      {"estimate",
       "SI-unit estimates: timescale ratio, localization table, visibility",
       {{"mode", Kind::text, "ratio", "ratio, table1 or visibility"},
        {"mass-g", Kind::number, 1.0, "mass, g"},
        {"temp-K", Kind::number, 300.0, "temperature, K"},
        {"dx-cm", Kind::number, 1.0, "separation, cm"},
        {"relaxation-rate-s", Kind::number, 0.0, "relaxation rate, 1/s (0: ratio only)"},
        {"table1-lambda", Kind::numbers, none, "scattering constants, 1/(cm^2 s), 8 entries, 0 = not given"},
        {"table1-gamma", Kind::numbers, none, "total scattering rates, 1/s, 8 entries, 0 = not given"},
        {"gamma-per-pressure", Kind::number, 1.0, "decoherence rate per pressure, 1/(Pa s)"},
        {"transit-time-s", Kind::number, 1e-3, "transit time, s"},
        {"pressures-Pa", Kind::numbers, json::array({0.0, 1e-4, 2e-4, 4e-4, 8e-4}), "pressures, Pa"},
        {"v0", Kind::number, 1.0, "visibility at zero pressure"}},
       run_estimate},
  };
}

json load_config(const std::string& path, const std::string& command) {
  json j;
  try {
    j = json::parse(io::read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());
  }
  if (!j.is_object()) throw ConfigError(path + ": top level must be an object");
  if (j.contains("manifest-version")) {
    if (!j.contains("config")) throw ConfigError(path + ": manifest without config");
    j = j["config"];
  }
  if (j.contains("command")) {
    if (!j["command"].is_string() || j["command"] != command) {
      const std::string got = j["command"].is_string() ? j["command"].get<std::string>() : j["command"].dump();
      throw ConfigError("field 'command': config is for '" + got + "', not '" + command + "'");
    }
    j.erase("command");
  }
  return j;
}

json resolve(const Command& cmd, const std::vector<Field>& fields, const std::string& config_path,
             const std::map<std::string, std::string>& flag_values, const std::map<std::string, bool>& bool_flags) {
  json cfg;
  for (const auto& f : fields) cfg[f.name] = f.fallback;
  if (!config_path.empty()) {
    const json file = load_config(config_path, cmd.name);
    for (const auto& [key, value] : file.items()) {
      auto it = std::find_if(fields.begin(), fields.end(), [&](const Field& f) { return f.name == key; });
      if (it == fields.end()) throw ConfigError("field '" + key + "': unknown for '" + cmd.name + "'");
      if (!matches(it->kind, value)) throw ConfigError("field '" + key + "': expected " + kind_name(it->kind));
      cfg[key] = value;
    }
  }
  for (const auto& f : fields) {
    if (auto it = flag_values.find(f.name); it != flag_values.end()) cfg[f.name] = from_flag(f, it->second);
    if (auto it = bool_flags.find(f.name); it != bool_flags.end()) cfg[f.name] = it->second;
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decoherence scenario runner"};
  app.require_subcommand(1);
  const auto cmds = commands();
  struct Slot {
    std::vector<Field> fields;
    std::string config;
    std::map<std::string, std::string> values;
    std::map<std::string, bool> bools;
    std::map<std::string, CLI::Option*> options;
  };
  std::map<std::string, Slot> slots;
  for (const auto& c : cmds) {
    auto* sub = app.add_subcommand(c.name, c.help);
    Slot& s = slots[c.name];
    s.fields = c.fields;
    s.fields.insert(s.fields.end(), kCommon.begin(), kCommon.end());
    sub->add_option("--config", s.config, "JSON config file or run manifest");
    for (const auto& f : s.fields) {
      const std::string help = f.help + " [" + f.fallback.dump() + "]";
      if (f.kind == Kind::boolean) {
        s.options[f.name] = sub->add_flag("--" + f.name, s.bools[f.name], help);
      } else {
        s.options[f.name] = sub->add_option("--" + f.name, s.values[f.name], help);
      }
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  for (const auto& c : cmds) {
    if (!app.got_subcommand(c.name)) continue;
    Slot& s = slots[c.name];
    // keep only flags that were given
    std::map<std::string, std::string> values;
    std::map<std::string, bool> bools;
    for (const auto& f : s.fields) {
      if (s.options[f.name]->count() == 0) continue;
      if (f.kind == Kind::boolean) {
        bools[f.name] = s.bools[f.name];
      } else {
        values[f.name] = s.values[f.name];
      }
    }
    try {
      const auto t0 = std::chrono::steady_clock::now();
      Run run(c.name, resolve(c, s.fields, s.config, values, bools));
      c.body(run);
      run.manifest(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
      return 0;
    } catch (const ConfigError& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return 2;
    } catch (const std::invalid_argument& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return 2;
    } catch (const numerical_error& e) {
      std::cerr << "numerical error: " << e.what() << "\n";
      return 3;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }
  }
  return 2;
}
