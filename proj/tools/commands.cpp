#include "commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "fdrum/diaperiodic.hpp"
#include "fdrum/dimension.hpp"
#include "fdrum/green.hpp"
#include "fdrum/ifs_io.hpp"
#include "fdrum/prefractal.hpp"

namespace fdrum::cli {

namespace {

// Tracks which module is running so failures name it.
struct Stage {
  std::string module = "cli";
  std::string param;
};

template <typename F>
int guarded(Stage& stage, std::ostream& err, F&& body) {
  auto report = [&](const char* kind, const std::exception& e) {
    err << "error [" << stage.module << (stage.param.empty() ? "" : ", --" + stage.param) << "] "
        << kind << ": " << e.what() << '\n';
  };
  try {
    return body();
  } catch (const NumericalError& e) {
    report("numerical", e);
    return kExitNumerical;
  } catch (const ParseError& e) {
    report("parse", e);
    return kExitConfig;
  } catch (const std::exception& e) {
    report("config", e);
    return kExitConfig;
  }
}

std::filesystem::path output_path(const RunConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.out);
  return std::filesystem::path(cfg.out) / name;
}

std::ofstream open_output(const RunConfig& cfg, const std::string& name) {
  const auto path = output_path(cfg, name);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ArgumentError("cannot write '" + path.string() + "'");
  return f;
}

struct Prepared {
  Ifs ifs;
  int base;
  bool aligned;
};

Prepared prepare(const RunConfig& cfg, Stage& stage) {
  stage = {"ifs_core", "ifs"};
  Ifs ifs = resolve_ifs(cfg.ifs);
  stage = {"prefractal_grid", "base"};
  int base = cfg.base;
  if (base == 0) {
    const auto natural = natural_base(ifs);
    if (!natural) throw ArgumentError("IFS has no natural integer base; pass --base");
    base = *natural;
  }
  const bool aligned = is_grid_aligned(ifs, base);
  return {std::move(ifs), base, aligned};
}

CellSet cells_at(const Prepared& p, int level) {
  return p.aligned ? rasterize_prefractal(p.ifs, level, p.base)
                   : sample_prefractal(p.ifs, level, p.base);
}

struct LevelSpectrum {
  GridDomain grid;
  SparseSymMatrix laplacian;
  Spectrum spectrum;
};

LevelSpectrum level_spectrum(const Prepared& p, int level, const RunConfig& cfg, bool vectors,
                             Stage& stage) {
  stage = {"prefractal_grid", "refine"};
  const CellSet cs = cells_at(p, level);
  GridDomain grid = refine_to_grid(cs, cfg.refine);
  stage = {"laplace_spectrum", "refine"};
  SparseSymMatrix L = assemble_dirichlet_laplacian(grid);
  RawSpectrum raw;
  if (L.order() <= cfg.dense_cap) {
    raw = full_spectrum(L, {vectors, cfg.dense_cap});
  } else {
    stage.param = "eigs";
    const Eigen::Index k =
        cfg.eigs > 0 ? cfg.eigs : std::min<Eigen::Index>(L.order() - 1, 200);
    PartialSpectrumOptions opts;
    opts.want_vectors = vectors;
    opts.seed = cfg.seed;
    raw = partial_spectrum(L, k, opts);
  }
  stage.param = "cluster-tol";
  Spectrum s = cluster_multiplicities(raw, cfg.cluster_tol.value_or(kDiscreteClusterTol),
                                      convention_from_exponent(cfg.exponent));
  s.meta.level = level;
  s.meta.spacing = grid.spacing();
  return {std::move(grid), std::move(L), std::move(s)};
}

std::int64_t ipow(std::int64_t b, int n) {
  std::int64_t r = 1;
  for (int i = 0; i < n; ++i) r *= b;
  return r;
}

}  // namespace

int cmd_gen(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  Stage stage;
  return guarded(stage, err, [&] {
    const Prepared p = prepare(cfg, stage);
    const int level = cfg.level.value_or(1);
    stage = {"prefractal_grid", "level"};
    const CellSet cs = cells_at(p, level);
    {
      auto f = open_output(cfg, "cells.txt");
      write_cellset(f, cs);
    }
    if (level >= 1) {
      const auto counts = box_counts(cs, level);
      auto f = open_output(cfg, "boxcounts.csv");
      write_box_counts_csv(f, counts);
    }
    const std::int64_t expected = ipow(static_cast<std::int64_t>(p.ifs.size()), level);
    out << "cells: " << cs.size() << " (p^N = " << expected << ", "
        << (static_cast<std::int64_t>(cs.size()) == expected ? "match" : "differs") << ")"
        << (p.aligned ? "" : " [sampled rasterization]") << '\n';
    out << "wrote " << output_path(cfg, "cells.txt").string() << '\n';
    return kExitOk;
  });
}

int cmd_spectrum(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  Stage stage;
  return guarded(stage, err, [&] {
    const Prepared p = prepare(cfg, stage);
    const int level = cfg.level.value_or(1);
    const auto ls = level_spectrum(p, level, cfg, false, stage);
    {
      auto f = open_output(cfg, "spectrum.csv");
      write_spectrum_csv(f, ls.spectrum);
    }
    {
      auto f = open_output(cfg, "plateau.csv");
      write_plateau_csv(f, ls.spectrum);
    }
    out << "unknowns: " << ls.laplacian.order() << ", eigenvalues: "
        << ls.spectrum.total_multiplicity() << ", distinct: " << ls.spectrum.size() << '\n';
    out << "convention: " << to_string(ls.spectrum.meta.convention) << '\n';
    out << "wrote " << output_path(cfg, "spectrum.csv").string() << '\n';
    return kExitOk;
  });
}

int cmd_classify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  Stage stage;
  return guarded(stage, err, [&] {
    const Prepared p = prepare(cfg, stage);
    const int level = cfg.level.value_or(1);
    stage = {"diaperiodic", "level"};
    if (level < 1) throw ArgumentError("classification needs --level >= 1");
    const auto child = level_spectrum(p, level, cfg, false, stage);
    const auto parent = level_spectrum(p, level - 1, cfg, false, stage);
    stage = {"diaperiodic", "match-tol"};
    const auto ratios = p.ifs.ratios();
    const auto cls = classify_spectrum(child.spectrum, parent.spectrum, ratios,
                                       cfg.match_tol.value_or(kDiscreteMatchTol), level);
    {
      auto f = open_output(cfg, "classification.csv");
      f << "# level " << level << "\n# convention " << to_string(child.spectrum.meta.convention)
        << "\n# match_tol " << std::setprecision(17) << cfg.match_tol.value_or(kDiscreteMatchTol)
        << '\n';
      write_classification_csv(f, cls);
    }
    out << "diaperiodic: " << cls.diaperiodic_count()
        << ", interconnective: " << cls.interconnective_count() << '\n';
    out << "wrote " << output_path(cfg, "classification.csv").string() << '\n';
    return kExitOk;
  });
}

int cmd_green(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  Stage stage;
  return guarded(stage, err, [&] {
    const Prepared p = prepare(cfg, stage);
    const int level = cfg.level.value_or(1);
    const int d = static_cast<int>(p.ifs.dim());
    stage = {"green", "batch"};
    std::ifstream in(cfg.batch);
    if (!in) throw ArgumentError("cannot open batch file '" + cfg.batch + "'");

    const int eval_level = cfg.renormalized ? level - 1 : level;
    if (eval_level < 0) throw ArgumentError("renormalized evaluation needs --level >= 1");
    const auto ls = level_spectrum(p, eval_level, cfg, true, stage);
    stage = {"green", "pole-guard"};
    GreenEvaluator ev = GreenEvaluator::from_spectrum(ls.grid, ls.spectrum);
    ev.pole_guard = cfg.pole_guard;

    auto f = open_output(cfg, "green.csv");
    f << std::setprecision(17);
    f << "# level " << level << "\n# evaluator " << (cfg.renormalized ? "renormalized" : "modal")
      << "\n# normalization delta/h^d\n";
    std::string line;
    int lineno = 0;
    std::size_t rows = 0;
    stage = {"green", "batch"};
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      std::vector<double> values;
      std::stringstream fields(line);
      std::string cell;
      bool numeric = true;
      while (std::getline(fields, cell, ',')) {
        try {
          std::size_t used = 0;
          values.push_back(std::stod(cell, &used));
          if (used != cell.size() && cell.find_first_not_of(" \t", used) != std::string::npos)
            numeric = false;
        } catch (const std::exception&) {
          numeric = false;
        }
      }
      if (!numeric) {
        if (rows == 0) {
          f << line << ",value\n";
          continue;
        }
        throw ParseError(lineno, "non-numeric batch row");
      }
      if (static_cast<int>(values.size()) != 2 * d + 1)
        throw ParseError(lineno, "expected " + std::to_string(2 * d + 1) + " columns (x, x', lambda)");
      const Eigen::VectorXd x = Eigen::Map<Eigen::VectorXd>(values.data(), d);
      const Eigen::VectorXd xp = Eigen::Map<Eigen::VectorXd>(values.data() + d, d);
      const double lambda = values.back();
      const double g = cfg.renormalized ? green_renormalized(ev, p.ifs, x, xp, lambda)
                                        : green_modal(ev, x, xp, lambda);
      f << line << ',' << g << '\n';
      ++rows;
    }
    out << "evaluated " << rows << " rows\n";
    out << "wrote " << output_path(cfg, "green.csv").string() << '\n';
    return kExitOk;
  });
}

int cmd_dims(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  Stage stage;
  return guarded(stage, err, [&] {
    const Prepared p = prepare(cfg, stage);
    stage = {"dimension", "mode"};
    DimensionOptions opts;
    opts.mode = cfg.mode == "numeric" ? SpectralMode::numeric : SpectralMode::analytic;
    opts.spectral_level = cfg.level.value_or(opts.mode == SpectralMode::analytic ? 1000 : 1);
    opts.truncation = cfg.trunc;
    opts.box_level = cfg.box_level;
    opts.grid.base = p.base;
    opts.grid.refinement = cfg.refine;
    opts.grid.cluster_tol = cfg.cluster_tol.value_or(kDiscreteClusterTol);
    opts.grid.dense_cap = cfg.dense_cap;
    opts.convention = convention_from_exponent(cfg.exponent);
    const DimensionReport r = dimension_report(p.ifs, opts);

    nlohmann::ordered_json j;
    j["mode"] = to_string(r.mode);
    j["convention"] = to_string(r.convention);
    j["spectral_level"] = r.levels_used.at(0);
    j["box_level"] = r.levels_used.at(1);
    j["truncation"] = r.truncation;
    j["box_exact"] = r.box_exact;
    j["spectral_dim"] = r.spectral_dim;
    j["box_dim"] = r.box_dim;
    j["moran_dim"] = r.moran_dim;
    j["gap_spectral_box"] = r.gap_spectral_box();
    j["gap_spectral_moran"] = r.gap_spectral_moran();
    j["gap_box_moran"] = r.gap_box_moran();

    {
      auto f = open_output(cfg, "report.csv");
      write_report_csv(f, r);
    }
    if (cfg.json) {
      auto f = open_output(cfg, "report.json");
      f << j.dump(2) << '\n';
      out << j.dump(2) << '\n';
    } else {
      auto f = open_output(cfg, "report.txt");
      write_report_text(f, r);
      write_report_text(out, r);
    }
    return kExitOk;
  });
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Prefractal Laplacian spectra and spectral/box-counting dimensions"};
  app.require_subcommand(1);
  RunConfig cfg;
  int level = -1;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--ifs", cfg.ifs, "preset (interval, cantor, carpet, gasket) or IFS file")
        ->capture_default_str();
    sub->add_option("--level", level, "prefractal level N")->check(CLI::NonNegativeNumber);
    sub->add_option("--base", cfg.base, "cells per side per iteration (0: from ratios)")
        ->check(CLI::Range(0, 64));
    sub->add_option("--refine", cfg.refine, "grid nodes per cell side")
        ->check(CLI::Range(2, 4096))
        ->capture_default_str();
    sub->add_option("--trunc", cfg.trunc, "truncation M")->check(CLI::Range(1, 1000000));
    sub->add_option("--cluster-tol", cfg.cluster_tol, "relative clustering tolerance")
        ->check(CLI::PositiveNumber);
    sub->add_option("--match-tol", cfg.match_tol, "relative matching tolerance")
        ->check(CLI::PositiveNumber);
    sub->add_option("--pole-guard", cfg.pole_guard, "relative distance to eigenvalues")
        ->check(CLI::PositiveNumber);
    sub->add_option("--mode", cfg.mode, "analytic|numeric")
        ->check(CLI::IsMember({"analytic", "numeric"}));
    sub->add_option("--seed", cfg.seed, "seed for iterative eigensolver start vectors");
    sub->add_option("--out", cfg.out, "output directory")->capture_default_str();
    sub->add_flag("--json", cfg.json, "machine-readable report");
    sub->add_option("--exponent", cfg.exponent, "magnitude exponent: 1 wavenumber, 2 eigenvalue")
        ->check(CLI::IsMember({1, 2}));
    sub->add_option("--box-level", cfg.box_level, "cell-set level for box counting")
        ->check(CLI::Range(1, 12));
    sub->add_option("--dense-cap", cfg.dense_cap, "largest order for dense eigensolves")
        ->check(CLI::PositiveNumber);
    sub->add_option("--eigs", cfg.eigs, "eigenpairs for the iterative solver")
        ->check(CLI::NonNegativeNumber);
  };

  auto* gen = app.add_subcommand("gen", "rasterize a prefractal and count boxes");
  auto* spectrum = app.add_subcommand("spectrum", "Dirichlet spectrum with multiplicities");
  auto* classify = app.add_subcommand("classify", "split a spectrum into diaperiodic/interconnective");
  auto* green = app.add_subcommand("green", "evaluate Green's function over a batch of points");
  auto* dims = app.add_subcommand("dims", "spectral, box-counting and similarity dimensions");
  for (auto* sub : {gen, spectrum, classify, green, dims}) common(sub);
  green->add_option("--batch", cfg.batch, "CSV rows x..,x'..,lambda")->required();
  green->add_flag("--renormalized", cfg.renormalized, "evaluate from the level N-1 spectrum");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error [cli] config: " << e.what() << '\n';
    return kExitConfig;
  }
  if (level >= 0) cfg.level = level;

  if (gen->parsed()) return cmd_gen(cfg, out, err);
  if (spectrum->parsed()) return cmd_spectrum(cfg, out, err);
  if (classify->parsed()) return cmd_classify(cfg, out, err);
  if (green->parsed()) return cmd_green(cfg, out, err);
  return cmd_dims(cfg, out, err);
}

}  // namespace fdrum::cli
