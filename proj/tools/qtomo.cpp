// qtomo: state preparation, simulated measurement, reconstruction and quorum
// checks from the command line. Flags and file layouts are in formats.md.

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>

#include "observables.hpp"
#include "qtomo/dualbasis.hpp"
#include "qtomo/io.hpp"
#include "qtomo/quorums.hpp"
#include "qtomo/recon.hpp"
#include "qtomo/sampler.hpp"

using namespace qtomo;
using cli::UsageError;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitPrecondition = 3;

// --- state flags (state, sample) ---------------------------------------------

struct StateOptions {
  std::string kind;
  double param = 0.0;
  double param_im = 0.0;
  int dim = 0;
  std::uint64_t seed = 0;
  double s = 0.0;
  double theta = 0.0;
  double azimuth = 0.0;

  void add_to(CLI::App* app) {
    app->add_option("--kind", kind, "fock | coherent | squeezed | thermal | random | spin")
        ->check(CLI::IsMember({"fock", "coherent", "squeezed", "thermal", "random", "spin"}));
    app->add_option("--param", param, "n (fock), Re beta (coherent), |zeta| or Re zeta (squeezed), mean n (thermal)");
    app->add_option("--param-im", param_im, "Im beta (coherent), Im zeta (squeezed)");
    app->add_option("--dim", dim, "Hilbert-space dimension n_max + 1")->check(CLI::PositiveNumber);
    app->add_option("--s", s, "spin quantum number (spin states and spin sampling)");
    app->add_option("--theta", theta, "polar angle of a spin state's direction");
    app->add_option("--azimuth", azimuth, "azimuth of a spin state's direction");
  }

  HalfInteger spin() const {
    try {
      const HalfInteger h = half_integer_from(s);
      if (h.twice < 1) throw UsageError("--s must be a positive half-integer");
      return h;
    } catch (const PreconditionError&) {
      throw UsageError("--s must be a positive half-integer");
    }
  }

  DensityMatrix make(std::uint64_t random_seed) const {
    if (kind == "spin") {
      const HalfInteger h = spin();
      if (dim != 0 && dim != spin_dim(h)) throw UsageError("--dim must equal 2s + 1 for spin states");
      return make_state({states::SpinPure{h, direction(theta, azimuth)}, spin_dim(h)});
    }
    const int d = dim != 0 ? dim : s != 0.0 ? spin_dim(spin()) : 0;
    if (d == 0) throw UsageError("--dim (or --s) is required for --kind " + kind);
    if (kind == "fock") {
      if (param != std::round(param)) throw UsageError("--param must be an integer for fock states");
      return make_state({states::Fock{static_cast<int>(param)}, d});
    }
    if (kind == "coherent") return make_state({states::Coherent{cplx(param, param_im)}, d});
    if (kind == "squeezed") return make_state({states::SqueezedVacuum{cplx(param, param_im)}, d});
    if (kind == "thermal") return make_state({states::Thermal{param}, d});
    if (kind == "random") return make_state({states::RandomMixed{random_seed}, d});
    throw UsageError("unknown state kind '" + kind + "'");
  }
};

// --- estimator overrides -------------------------------------------------------

struct ConfigOptions {
  EstimatorConfig cfg;

  void add_to(CLI::App* app) {
    app->add_option("--k-max", cfg.k_max, "homodyne frequency cutoff");
    app->add_option("--reg-eps", cfg.reg_eps, "homodyne Gaussian regularizer");
    app->add_option("--table-step", cfg.table_step, "pattern-function table spacing");
    app->add_option("--pad", cfg.pad, "extra Fock levels for squeezed kernels");
    app->add_option("--phi-grid", cfg.phi_grid, "phase grid (0 = 4 dim)");
  }
};

void print_summary(const std::string& line) { std::cout << line << std::endl; }

std::string fmt(double v) { return detail::format_g17(v); }

// --- state ---------------------------------------------------------------------

struct StateCommand {
  StateOptions state;
  std::string output;

  void add_to(CLI::App& app) {
    auto* sub = app.add_subcommand("state", "write a density matrix to a JSON file");
    state.add_to(sub);
    sub->add_option("--seed", state.seed, "seed for --kind random");
    sub->add_option("-o,--output", output, "state file to write")->required();
    sub->callback([this] { run(); });
    sub->get_option("--kind")->required();
  }

  void run() const {
    const DensityMatrix rho = state.make(state.seed);
    write_json_file(output, state_to_json(rho));
    print_summary("dim " + std::to_string(rho.dim()) + " trace " + fmt(rho.op().trace().real()) + " purity " +
                  fmt(rho.purity()) + " rho_00 " + fmt(rho.matrix()(0, 0).real()));
  }
};

// --- sample --------------------------------------------------------------------

struct SampleCommand {
  std::string method;
  std::string state_file;
  StateOptions state;
  std::size_t shots = 0;
  std::uint64_t seed = 0;
  std::string output;
  double zeta_re = 0.0, zeta_im = 0.0;
  double radius = 0.0;
  std::optional<double> fixed_phi, fixed_psi;
  std::vector<double> fixed_direction;
  std::uint64_t state_seed = 0;

  void add_to(CLI::App& app) {
    auto* sub = app.add_subcommand("sample", "simulate quorum measurements and write records as CSV");
    sub->add_option("--method", method, "homodyne | squeezed | parity | spin | pauli | kerr")
        ->required()
        ->check(CLI::IsMember({"homodyne", "squeezed", "parity", "spin", "pauli", "kerr"}));
    sub->add_option("--state", state_file, "state JSON file (default: inline --kind flags, else |0>)");
    state.add_to(sub);
    sub->add_option("--state-seed", state_seed, "seed for an inline --kind random state");
    sub->add_option("--shots", shots, "number of records (per axis for pauli)")->required();
    sub->add_option("--seed", seed, "random seed")->required();
    sub->add_option("-o,--output", output, "record CSV to write")->required();
    sub->add_option("--zeta-re", zeta_re, "squeezing parameter, real part");
    sub->add_option("--zeta-im", zeta_im, "squeezing parameter, imaginary part");
    sub->add_option("--radius", radius, "parity proposal radius (default 2 + sqrt(n_max))");
    sub->add_option("--fixed-phi", fixed_phi, "fix the homodyne phase");
    sub->add_option("--fixed-psi", fixed_psi, "fix the Kerr phase");
    sub->add_option("--fixed-direction", fixed_direction, "fix the spin direction: theta phi")->expected(2);
    sub->callback([this] { run(); });
  }

  DensityMatrix load_state() const {
    if (!state_file.empty()) {
      if (!state.kind.empty()) throw UsageError("give either --state or --kind, not both");
      return state_from_json(read_json_file(state_file));
    }
    if (!state.kind.empty()) return state.make(state_seed);
    // Default |0>: vacuum, or m = +s along z for spins.
    if (method == "spin") return make_state({states::Fock{0}, spin_dim(state.spin())});
    if (method == "pauli") return make_state({states::Fock{0}, 2});
    if (state.dim == 0) throw UsageError("--state, --kind or --dim is required");
    return make_state({states::Fock{0}, state.dim});
  }

  void run() const {
    if (shots == 0) throw PreconditionError("shots must be at least 1");
    const DensityMatrix rho = load_state();
    RecordSet rec;
    if (method == "homodyne") {
      rec = sample_homodyne(rho, shots, seed, fixed_phi);
    } else if (method == "squeezed") {
      EstimatorConfig cfg;
      cfg.dim = rho.dim();
      rec = sample_squeezed(rho, SqueezeParams{cplx(zeta_re, zeta_im)}, shots, seed, cfg, fixed_phi);
    } else if (method == "parity") {
      rec = sample_displaced_parity(rho, shots, seed, radius);
    } else if (method == "spin") {
      const HalfInteger s = state.s != 0.0 ? state.spin() : HalfInteger{rho.dim() - 1};
      std::optional<std::array<double, 2>> fixed;
      if (!fixed_direction.empty()) fixed = std::array<double, 2>{fixed_direction[0], fixed_direction[1]};
      rec = sample_spin(rho, s, shots, seed, fixed);
    } else if (method == "pauli") {
      rec = sample_pauli(rho, shots, seed);
    } else {
      EstimatorConfig cfg;
      cfg.dim = rho.dim();
      rec = sample_kerr_phase(rho, shots, seed, cfg, fixed_psi);
    }
    write_records_file(output, rec);
    print_summary("method " + method + " shots " + std::to_string(rec.size()) + " seed " + std::to_string(seed) +
                  " -> " + output);
  }
};

// --- reconstruct ----------------------------------------------------------------

struct ReconstructCommand {
  std::string method;
  std::string records_file;
  std::string state_file;
  std::string reference_file;
  std::string observable;
  std::string output;
  int dim = 0;
  int n_max = -1;
  bool nearest_physical = false;
  ConfigOptions config;

  void add_to(CLI::App& app) {
    auto* sub = app.add_subcommand("reconstruct", "estimate an observable or the density matrix");
    sub->add_option("--method", method, "homodyne | squeezed | parity | spin | pauli | kerr | nonunitary")
        ->required()
        ->check(CLI::IsMember({"homodyne", "squeezed", "parity", "spin", "pauli", "kerr", "nonunitary"}));
    sub->add_option("--records", records_file, "record CSV (all methods except nonunitary)");
    sub->add_option("--state", state_file, "state JSON (nonunitary only)");
    sub->add_option("--dim", dim, "Fock truncation of the oscillator kernels")->check(CLI::PositiveNumber);
    sub->add_option("--n-max", n_max, "largest Fock index reconstructed")->check(CLI::NonNegativeNumber);
    sub->add_option("--observable", observable, "estimate one observable instead of the matrix");
    sub->add_option("--reference", reference_file, "state JSON to compare the reconstruction with");
    sub->add_flag("--nearest-physical", nearest_physical, "also report the nearest density matrix");
    sub->add_option("-o,--output", output, "result JSON (default: stdout)");
    config.add_to(sub);
    sub->callback([this] { run(); });
  }

  int kernel_dim(Method m, const RecordSet& rec, const std::optional<DensityMatrix>& reference) const {
    if (m == Method::spin) return spin_dim(record_spin(rec));
    if (m == Method::pauli) return 2;
    if (dim > 0) return dim;
    if (reference) return reference->dim();
    throw UsageError("--dim is required for method " + method);
  }

  void run() const {
    const Method m = method_from_name(method);
    std::optional<DensityMatrix> reference;
    if (!reference_file.empty()) reference = state_from_json(read_json_file(reference_file));

    json out;
    if (m == Method::nonunitary) {
      if (state_file.empty()) throw UsageError("method nonunitary reads --state, not records");
      const DensityMatrix rho = state_from_json(read_json_file(state_file));
      EstimatorConfig cfg = config.cfg.with_dim(rho.dim());
      if (!observable.empty()) {
        const cplx v = nonunitary_reconstruct(cli::parse_observable(observable, rho.dim()), rho, cfg);
        out = estimate_to_json({v, 0.0, 0, {}}, method, observable);
      } else {
        out = finish(reconstruct_matrix_nonunitary(rho, cfg, n_max), reference);
      }
    } else {
      if (records_file.empty()) throw UsageError("--records is required for method " + method);
      if (!state_file.empty()) throw UsageError("--state is only used by method nonunitary");
      const RecordSet rec = read_records_file(records_file);
      require_family(rec, method_family(m));
      const int d = kernel_dim(m, rec, reference);
      const EstimatorConfig cfg = config.cfg.with_dim(d);
      if (!observable.empty()) {
        out = estimate_to_json(estimate_observable(cli::parse_observable(observable, d), rec, m, cfg), method,
                               observable);
      } else {
        out = finish(reconstruct_matrix(rec, m, cfg, n_max), reference);
      }
    }
    if (output.empty()) {
      std::cout << out.dump(2) << std::endl;
    } else {
      write_json_file(output, out);
      print_summary("method " + method + " -> " + output);
    }
  }

  json finish(const ReconstructedMatrix& r, const std::optional<DensityMatrix>& reference) const {
    json out = reconstruction_to_json(r, method);
    if (reference) {
      if (reference->dim() < r.dim) throw DimensionMismatch("reference state is smaller than the reconstruction");
      const Matrix ref = reference->matrix().topLeftCorner(r.dim, r.dim);
      out["diagnostics"]["comparison"] = comparison_to_json(compare_states(r.hermitized(), ref));
    }
    if (nearest_physical) {
      json entries = json::array();
      const Matrix p = nearest_physical_state(r.hermitized());
      for (int k = 0; k < r.dim; ++k)
        for (int n = 0; n < r.dim; ++n) entries.push_back(json::array({p(k, n).real(), p(k, n).imag()}));
      out["diagnostics"]["nearest_physical"] = std::move(entries);
    }
    return out;
  }
};

// --- quorum --------------------------------------------------------------------

struct QuorumCommand {
  std::string spec_file;
  std::string dual_method = "pseudoinverse";
  std::string output;
  double tol = 1e-10;
  bool as_json = false;
  QuorumDescriptor build;
  double build_spin = 1.0;

  void add_to(CLI::App& app) {
    auto* q = app.add_subcommand("quorum", "quorum specs: verify, dual, build");
    q->require_subcommand(1);

    auto* verify = q->add_subcommand("verify", "rank, irreducibility and bi-orthogonality of a quorum spec");
    verify->add_option("--spec", spec_file, "quorum spec JSON")->required();
    verify->add_option("--tol", tol, "bi-orthogonality tolerance");
    verify->add_flag("--json", as_json, "print the report as JSON");
    verify->callback([this] { run_verify(); });

    auto* dual = q->add_subcommand("dual", "compute and write the dual set");
    dual->add_option("--spec", spec_file, "quorum spec JSON")->required();
    dual->add_option("--method", dual_method, "gram-schmidt | pseudoinverse")
        ->check(CLI::IsMember({"gram-schmidt", "pseudoinverse"}));
    dual->add_option("--tol", tol, "bi-orthogonality tolerance");
    dual->add_option("-o,--output", output, "dual JSON to write")->required();
    dual->callback([this] { run_dual(); });

    auto* b = q->add_subcommand("build", "write an explicit spec for a built-in quorum");
    b->add_option("--family", build.family, "pauli | projectors | weigert | weyl | random")
        ->required()
        ->check(CLI::IsMember({"pauli", "projectors", "weigert", "weyl", "random"}));
    b->add_option("--dim", build.dim, "dimension (projectors, weyl, random)");
    b->add_option("--s", build_spin, "spin (weigert)");
    b->add_option("--directions", build.directions, "spiral | random (weigert)");
    b->add_option("--seed", build.seed, "seed (random directions or basis)");
    b->add_option("--grid", build.grid, "lattice points per axis (weyl)");
    b->add_option("--extent", build.extent, "lattice half-width (weyl)");
    b->add_option("-o,--output", output, "spec JSON to write")->required();
    b->callback([this] { run_build(); });
  }

  void run_verify() const {
    const SpanningSet s = spanning_set_from_json(read_json_file(spec_file));
    const auto irr = irreducibility_rank(s);
    json report{{"version", kFormatVersion},
                {"dim", s.dim()},
                {"elements", s.size()},
                {"rank", irr.rank},
                {"irreducible", irr.irreducible}};
    if (irr.irreducible) {
      const DualSet b = pseudoinverse_dual(s);
      const auto bio = check_biorthogonality(s, b, tol);
      report["biorthogonality_violation"] = bio.max_violation;
      report["verdict"] = bio.pass ? "pass" : "fail";
    } else {
      // Self-dual trace check: orthogonal families pass it even when reducible.
      const auto tc =
          check_trace_condition(s, DualSet::self_dual(s), ReproducingKernelMatrix::orthogonal_default(s), tol);
      report["self_dual_trace_condition"] = tc.trace_condition_holds;
      report["verdict"] = "reducible";
      if (const auto witness = orthogonal_witness(s)) report["witness_overlap_max"] = max_overlap(s, *witness);
    }
    if (as_json) {
      std::cout << report.dump(2) << std::endl;
      return;
    }
    std::cout << "dim " << s.dim() << ", " << s.size() << " elements\n"
              << "rank " << irr.rank << " of " << s.dim() * s.dim() << " ("
              << (irr.irreducible ? "irreducible" : "reducible") << ")\n";
    if (report.contains("self_dual_trace_condition"))
      std::cout << "self-dual trace condition " << (report["self_dual_trace_condition"].get<bool>() ? "holds" : "fails")
              << "\n";
    if (report.contains("witness_overlap_max"))
      std::cout << "orthogonal witness overlap " << fmt(report["witness_overlap_max"].get<double>()) << "\n";
    if (report.contains("biorthogonality_violation"))
      std::cout << "bi-orthogonality violation " << fmt(report["biorthogonality_violation"].get<double>()) << "\n";
    std::cout << "verdict: " << report["verdict"].get<std::string>() << std::endl;
  }

  static double max_overlap(const SpanningSet& s, const Operator& o) {
    double m = 0.0;
    for (const auto& e : s.elements()) m = std::max(m, std::abs(hs_inner(e.op, o)) / e.op.hs_norm());
    return m;
  }

  void run_dual() const {
    const SpanningSet s = spanning_set_from_json(read_json_file(spec_file));
    const DualSet b = dual_method == "gram-schmidt" ? gram_schmidt_dual(s).dual : pseudoinverse_dual(s);
    const auto bio = check_biorthogonality(s, b, tol);
    if (!bio.pass)
      throw PreconditionError("dual fails bi-orthogonality: violation " + fmt(bio.max_violation) + " > " + fmt(tol));
    write_json_file(output, dual_to_json(b, dual_method));
    print_summary("dual (" + dual_method + ") of " + std::to_string(s.size()) + " elements, violation " +
                  fmt(bio.max_violation) + " -> " + output);
  }

  void run_build() {
    build.spin = half_integer_from(build_spin);
    const SpanningSet s = build_quorum(build);
    write_json_file(output, spanning_set_to_json(s));
    print_summary("quorum " + build.family + ": dim " + std::to_string(s.dim()) + ", " + std::to_string(s.size()) +
                  " elements -> " + output);
  }
};

// --- kernels eval ----------------------------------------------------------------

struct KernelsCommand {
  std::string kernel;
  std::string observable = "identity";
  int dim = 0;
  double s = 0.5;
  double from = -3.0, to = 3.0;
  int points = 121;
  double phi = 0.0, psi = 0.0, angle = 0.0, m = 0.5;
  std::string output;
  ConfigOptions config;

  void add_to(CLI::App& app) {
    auto* k = app.add_subcommand("kernels", "tabulate estimator kernels");
    k->require_subcommand(1);
    auto* eval = k->add_subcommand("eval", "kernel of an observable on a 1-D grid, as CSV x,re,im");
    eval->add_option("--kernel", kernel, "homodyne | parity | spin | kerr")
        ->required()
        ->check(CLI::IsMember({"homodyne", "parity", "spin", "kerr"}));
    eval->add_option("--observable", observable, "observable name (default identity)");
    eval->add_option("--dim", dim, "dimension (oscillator kernels)")->check(CLI::PositiveNumber);
    eval->add_option("--s", s, "spin (spin kernel)");
    eval->add_option("--m", m, "outcome m (spin kernel)");
    eval->add_option("--from", from, "grid start");
    eval->add_option("--to", to, "grid end");
    eval->add_option("--points", points, "grid points")->check(CLI::Range(2, 1000000));
    eval->add_option("--phi", phi, "homodyne phase, spin azimuth");
    eval->add_option("--psi", psi, "Kerr phase");
    eval->add_option("--angle", angle, "direction of the parity ray alpha = x e^{i angle}");
    eval->add_option("-o,--output", output, "CSV to write")->required();
    config.add_to(eval);
    eval->callback([this] { run(); });
  }

  void run() const {
    // x is q (homodyne), |alpha| (parity), theta (spin), phi (kerr).
    std::function<cplx(double)> value;
    std::optional<HomodyneKernel> hk;
    std::optional<HomodyneObservable> ho;
    Operator a = Operator::identity(1);
    if (kernel == "spin") {
      HalfInteger h;
      try {
        h = half_integer_from(s);
      } catch (const PreconditionError&) {
        throw UsageError("--s must be a positive half-integer");
      }
      if (h.twice < 1) throw UsageError("--s must be a positive half-integer");
      a = cli::parse_observable(observable, spin_dim(h));
      const HalfInteger mm = [&] {
        try {
          return half_integer_from(m);
        } catch (const PreconditionError&) {
          throw UsageError("--m must be a half-integer");
        }
      }();
      value = [&, h, mm](double theta) { return spin_kernel(a, mm, direction(theta, phi), h); };
    } else {
      if (dim == 0) throw UsageError("--dim is required for the " + kernel + " kernel");
      a = cli::parse_observable(observable, dim);
      const EstimatorConfig cfg = config.cfg.with_dim(dim);
      if (kernel == "homodyne") {
        hk.emplace(cfg);
        ho.emplace(*hk, a);
        value = [&](double q) {
          std::vector<double> scratch;
          return ho->value(q, phi, scratch);
        };
      } else if (kernel == "parity") {
        value = [&](double r) {
          const Matrix x = displaced_parity_matrix(std::polar(r, angle), dim);
          return cplx((a.matrix() * x).trace());
        };
      } else {
        const cplx c = detail::kerr_identity_part(a);
        value = [&, c](double ph) { return c + detail::kerr_offdiagonal_value(a.matrix(), psi, ph); };
      }
    }
    std::ostringstream out;
    out << "x,re,im\n";
    for (int i = 0; i < points; ++i) {
      const double x = from + (to - from) * i / (points - 1);
      const cplx v = value(x);
      out << fmt(x) << ',' << fmt(v.real()) << ',' << fmt(v.imag()) << '\n';
    }
    write_text_file(output, out.str());
    print_summary("kernel " + kernel + " for " + observable + ": " + std::to_string(points) + " points -> " + output);
  }
};

// --- errors --------------------------------------------------------------------

struct ErrorReporter {
  bool as_json = false;

  int report(int code, const std::string& type, const std::string& message) const {
    if (as_json) {
      const json j{{"version", kFormatVersion}, {"error", {{"exit_code", code}, {"type", type}, {"message", message}}}};
      std::cerr << j.dump() << std::endl;
    } else {
      std::cerr << "qtomo: " << type << " error: " << message << std::endl;
    }
    return code;
  }
};

void check_thread_env() {
  const char* env = std::getenv("QTOMO_THREADS");
  if (!env) return;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*env == '\0' || *end != '\0' || v < 1) throw UsageError("QTOMO_THREADS must be a positive integer");
}

}  // namespace

int main(int argc, char** argv) {
  ErrorReporter errors;
  for (int i = 1; i < argc; ++i)
    if (std::string(argv[i]) == "--json-errors") errors.as_json = true;

  CLI::App app{"qtomo: quantum tomography by kernel averaging"};
  app.require_subcommand(1);
  app.fallthrough();
  bool json_errors = false;
  app.add_flag("--json-errors", json_errors, "write errors to stderr as JSON");

  StateCommand state;
  SampleCommand sample;
  ReconstructCommand reconstruct;
  QuorumCommand quorum;
  KernelsCommand kernels;
  state.add_to(app);
  sample.add_to(app);
  reconstruct.add_to(app);
  quorum.add_to(app);
  kernels.add_to(app);

  try {
    check_thread_env();
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return errors.report(kExitUsage, "usage", e.what());
  } catch (const UsageError& e) {
    return errors.report(kExitUsage, "usage", e.what());
  } catch (const IoError& e) {
    return errors.report(kExitUsage, "io", e.what());
  } catch (const FormatError& e) {
    return errors.report(kExitUsage, "format", e.what());
  } catch (const DimensionMismatch& e) {
    return errors.report(kExitPrecondition, "dimension", e.what());
  } catch (const PreconditionError& e) {
    return errors.report(kExitPrecondition, "precondition", e.what());
  } catch (const std::exception& e) {
    return errors.report(1, "internal", e.what());
  }
  return 0;
}
