"""CSV/JSON writers for single-instance, ensemble and sweep runs."""
import csv
import json
import math
from pathlib import Path

import numpy as np

from .thermometry import CSV_COLUMNS, fmt

INSTANCE_COLUMNS = ("instance_id", "seed", "n_sites", "accepted", "reason", "mean_r",
                    "n_gaps", "scar_overlap", "scar_rank_fraction", "e_min", "e_max")
STATE_COLUMNS = ("family",) + CSV_COLUMNS
SCATTER_COLUMNS = ("instance_id", "beta_C", "beta_S", "delta_beta", "min_d1", "e_C", "e_S")
SWEEP_COLUMNS = ("n_sites", "family", "n", "median_abs_delta_beta", "median_min_d1",
                 "variance_delta_beta", "pearson")


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return fmt(v)
    return str(v)


def write_csv(path, header, rows):
    """RFC 4180 CSV (CRLF line ends, minimal quoting) with a header row."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])
    return path


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    return x


def write_json(path, doc):
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(doc), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def instance_rows(records):
    for r in records:
        chaos = r.chaos
        yield [r.instance_id, r.seed, r.n_sites, r.accepted, r.reason,
               chaos.mean_r if chaos else None, chaos.n_gaps if chaos else None,
               r.scar_overlap, r.scar_rank_fraction, *r.spectrum_bounds]


def state_rows(records):
    for r in records:
        for family in ("scar", "thermal"):
            res = getattr(r, family)
            if res is not None:
                yield [family] + res.csv_row(r.instance_id)
        for res in r.excited_band:
            yield ["band"] + res.csv_row(r.instance_id)


def scatter_rows(records, family):
    for r in records:
        if not r.accepted:
            continue
        res = getattr(r, family)
        e_c, e_s = r.fractions[family]
        yield [r.instance_id, res.beta_canonical, res.beta_subsystem, res.delta_beta,
               res.min_distance, e_c, e_s]


def histogram_rows(hist):
    for lo, hi, n in zip(hist.edges[:-1], hist.edges[1:], hist.counts):
        yield [float(lo), float(hi), int(n)]


def stats_document(stats):
    fams = {}
    for name, fs in stats.families.items():
        tail = fs.tail_fit
        fams[name] = {
            "n": fs.n,
            "mean_delta_beta": fs.mean_delta_beta,
            "variance_delta_beta": fs.variance_delta_beta,
            "stderr_delta_beta": fs.stderr_delta_beta,
            "median_abs_delta_beta": fs.median_abs_delta_beta,
            "mean_min_d1": fs.mean_min_distance,
            "median_min_d1": fs.median_min_distance,
            "pearson": fs.pearson,
            "pearson_degenerate": fs.pearson_degenerate,
            "delta_beta_histogram": {
                "bin_rule": "freedman-diaconis",
                "bin_width": fs.delta_beta_histogram.width,
                "edges": fs.delta_beta_histogram.edges,
                "counts": fs.delta_beta_histogram.counts,
            },
            "min_d1_histogram": {
                "bin_rule": "freedman-diaconis",
                "bin_width": fs.distance_histogram.width,
                "edges": fs.distance_histogram.edges,
                "counts": fs.distance_histogram.counts,
            },
            "tail_fit": None if tail is None else {
                "best": tail.model,
                "n_bins": tail.n_bins,
                "gaussian": {"variance": tail.gaussian_variance,
                             "residual": tail.gaussian_residual},
                "exponential": {"lambda": tail.exponential_lambda,
                                "residual": tail.exponential_residual},
            },
            "fraction_pairs": fs.fraction_pairs,
        }
    return {
        "n_sites": stats.n_sites,
        "n_accepted": stats.n_accepted,
        "n_rejected": stats.n_rejected,
        "rejections": stats.rejections,
        "families": fams,
    }


def sweep_rows(points):
    for p in points:
        yield [p.n_sites, p.family, p.n, p.median_abs_delta_beta, p.median_min_distance,
               p.variance_delta_beta, p.pearson]
