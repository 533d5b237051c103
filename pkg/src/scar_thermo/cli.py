"""
Command-line front end.

    scar-thermo single   --config run.toml --out out/
    scar-thermo ensemble --sites 12 --instances 500 --workers 4
    scar-thermo sweep    --config sweep.toml
    scar-thermo selftest

Exit codes: 0 success, 2 configuration error, 3 numerical error, 4 I/O error.
"""
import argparse
import logging
import os
from pathlib import Path
import sys

import numpy as np

from . import config as cfgmod
from .ensemble import (aggregate_stats, run_ensemble, run_until_accepted,
                       scaling_sweep, sector_for)
from .errors import ConfigError, ScarThermoError
from .model import (embed_projected_hamiltonian, project_to_sector, sample_gue_term,
                    xxz_term)
from .outputs import (INSTANCE_COLUMNS, SCATTER_COLUMNS, STATE_COLUMNS, SWEEP_COLUMNS,
                      histogram_rows, instance_rows, scatter_rows, state_rows,
                      stats_document, sweep_rows, write_csv, write_json)
from .spectral import (canonical_beta, diagonalize, locate_qmbs, r_statistic,
                       select_thermal_reference)
from .thermometry import thermometry_for_state

log = logging.getLogger("scar_thermo")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4


def _outdir(cfg):
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def local_term(cfg, seed=None):
    if cfg.model == "xxz":
        return xxz_term(cfg.xxz.b, cfg.xxz.J, cfg.xxz.delta)
    return sample_gue_term(cfg.base_seed if seed is None else seed)


def cmd_single(cfg):
    """Spectrum, beta_C(E) curve and per-state thermometry of one instance."""
    out = _outdir(cfg)
    n = cfg.n_sites
    term = local_term(cfg)
    sector = sector_for(n)
    spec = diagonalize(project_to_sector(embed_projected_hamiltonian(term, n), sector), sector)
    scar = locate_qmbs(spec)
    thermal = select_thermal_reference(spec.eigenvalues)
    ens = cfg.ensemble_config()
    try:
        chaos = r_statistic(spec.eigenvalues, ens.r_window, ens.r_min_levels_for(n))
    except ScarThermoError:
        chaos = None

    write_csv(out / "spectrum.csv", ("state_index", "energy", "entropy", "rank_fraction"),
              ([i, e, s, spec.rank_fraction(i)]
               for i, (e, s) in enumerate(zip(spec.eigenvalues, spec.entropies))))

    energies = np.linspace(spec.e_min, spec.e_max, 202)[1:-1]
    write_csv(out / "beta_curve.csv", ("energy", "beta_C"),
              ([e, canonical_beta(spec.eigenvalues, e)] for e in energies))

    results = [thermometry_for_state(spec, i, ens.search, cfg.emit_objective_samples)
               for i in range(spec.dimension)]

    def family(i):
        return "scar" if i == scar.index else "thermal" if i == thermal else "state"

    write_csv(out / "thermometry.csv", STATE_COLUMNS,
              ([family(r.eigenstate_index)] + r.csv_row(0) for r in results))
    if cfg.emit_objective_samples:
        write_csv(out / "objective_samples.csv", ("state_index", "beta", "d1"),
                  ([r.eigenstate_index, b, d] for r in results
                   for b, d in r.objective_samples))
    write_json(out / "manifest.json", cfg.manifest(
        command="single",
        local_term=term.to_manifest(),
        sector_dimension=spec.dimension,
        chaos=None if chaos is None else vars(chaos),
        scar={"index": scar.index, "overlap": scar.overlap, "energy": scar.energy,
              "rank_fraction": scar.rank_fraction},
        thermal_index=thermal,
    ))
    log.info("single: N=%d, dim=%d, scar rank %.3f", n, spec.dimension, scar.rank_fraction)
    return out


def _ensemble_records(cfg, n_sites):
    ens = cfg.ensemble_config()
    if cfg.min_accepted:
        return run_until_accepted(n_sites, cfg.min_accepted, cfg.base_seed, ens,
                                  cfg.workers, batch=cfg.n_instances)
    return run_ensemble(n_sites, cfg.n_instances, cfg.base_seed, ens, cfg.workers)


def cmd_ensemble(cfg):
    """Instance table, per-state thermometry, statistics and plot-ready CSVs."""
    out = _outdir(cfg)
    records = _ensemble_records(cfg, cfg.n_sites)
    n_acc = sum(r.accepted for r in records)
    print(f"accepted {n_acc} of {len(records)} instances at N={cfg.n_sites}")
    write_csv(out / "instances.csv", INSTANCE_COLUMNS, instance_rows(records))
    write_csv(out / "states.csv", STATE_COLUMNS, state_rows(records))
    for fam in ("scar", "thermal"):
        write_csv(out / f"scatter_{fam}.csv", SCATTER_COLUMNS, scatter_rows(records, fam))
    stats = aggregate_stats(records)
    for fam, fs in stats.families.items():
        write_csv(out / f"hist_delta_beta_{fam}.csv", ("lo", "hi", "count"),
                  histogram_rows(fs.delta_beta_histogram))
        write_csv(out / f"hist_min_d1_{fam}.csv", ("lo", "hi", "count"),
                  histogram_rows(fs.distance_histogram))
    write_json(out / "stats.json", stats_document(stats))
    write_json(out / "manifest.json", cfg.manifest(
        command="ensemble", n_instances_run=len(records), n_accepted=n_acc))
    return out


def cmd_sweep(cfg):
    """Per-N summary rows for the random ensemble and the fixed XXZ chain."""
    out = _outdir(cfg)
    x = cfg.xxz
    points = scaling_sweep(cfg.n_range, cfg.n_instances, cfg.ensemble_config(),
                           cfg.base_seed, (x.b, x.J, x.delta), cfg.workers,
                           cfg.min_accepted or None)
    write_csv(out / "sweep.csv", SWEEP_COLUMNS, sweep_rows(points))
    write_json(out / "manifest.json", cfg.manifest(command="sweep"))
    return out


def cmd_selftest(cfg):
    """Fast invariant checks; returns True when all pass."""
    from .selftest import run_selftest
    return run_selftest()


def build_parser():
    p = argparse.ArgumentParser(prog="scar-thermo", description=__doc__.splitlines()[1])
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (("single", "one instance: spectrum, beta_C curve, thermometry"),
                        ("ensemble", "random-instance ensemble statistics"),
                        ("sweep", "system-size sweep"),
                        ("selftest", "quick invariant checks")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--config", metavar="PATH", help="TOML configuration file")
        s.add_argument("--seed", type=int, metavar="U64", help="base seed")
        s.add_argument("--sites", type=int, metavar="N", help="chain length")
        s.add_argument("--instances", type=int, metavar="K", help="instances (per N)")
        s.add_argument("--workers", type=int, metavar="W",
                       help=f"worker processes (fallback: ${cfgmod.WORKERS_ENV})")
        s.add_argument("--out", metavar="DIR", help="output directory")
        s.add_argument("-v", "--verbose", action="store_true")
    return p


def resolve_config(args, environ=os.environ):
    cfg = cfgmod.load(args.config) if args.config else cfgmod.RunConfig()
    workers = args.workers
    if workers is None and environ.get(cfgmod.WORKERS_ENV):
        try:
            workers = int(environ[cfgmod.WORKERS_ENV])
        except ValueError:
            raise ConfigError("workers", f"${cfgmod.WORKERS_ENV} is not an integer")
    return cfgmod.with_overrides(cfg, base_seed=args.seed, n_sites=args.sites,
                                 n_instances=args.instances, workers=workers,
                                 output_dir=args.out)


COMMANDS = {"single": cmd_single, "ensemble": cmd_ensemble, "sweep": cmd_sweep,
            "selftest": cmd_selftest}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        result = COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ScarThermoError, ArithmeticError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    if result is False:
        return EXIT_NUMERICAL
    return EXIT_OK


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
