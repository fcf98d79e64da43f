"""Command-line front end.

Usage::

    cylend {geometry,certify,spectrum,sweep,mesh} [--config FILE] [--set path=value ...]

Every run ends with a JSON status block on stdout
(``{"status": ..., "exit_code": ..., "reason": ...}``).  Exit codes: 0 ok,
2 validation error, 3 numerical-convergence error.  ``CYLEND_OUTPUT_DIR``
overrides the output directory.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
import warnings

import numpy as np

from . import __version__, certificate, config as cfgmod, hyperbolic, mesh, plot, profile as profile_mod, spectrum
from .errors import CylendError

log = logging.getLogger("cylend")

COMMANDS = ("geometry", "certify", "spectrum", "sweep", "mesh")


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def _clean(obj):
    """JSON-safe copy: numpy scalars/arrays to Python, complex to [re, im], non-finite to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, complex):
        return [_clean(obj.real), _clean(obj.imag)]
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def _write(path, text):
    with open(path, "w", newline="") as fh:
        fh.write(text)


def geometry_dict(geo: hyperbolic.SurfaceGeometry) -> dict:
    def disk(D):
        return {"center": D.center, "radius": D.radius}

    def mob(T):
        return {"a": T.a, "b": T.b, "trace": T.trace, "translation_length": T.translation_length}

    return {
        "genus": geo.genus,
        "alpha": geo.alpha,
        "alpha_prime": geo.alpha_prime,
        "symmetric": geo.symmetric,
        "ell": geo.ell,
        "ell_closed_form": hyperbolic.boundary_length_closed_form(geo.genus, geo.alpha) if geo.symmetric else None,
        "threshold": 1.0 / geo.ell**2,
        "disks": [disk(D) for D in geo.disks],
        "core_disks": [disk(D) for D in geo.core_disks],
        "generators": [mob(T) for T in geo.generators],
        "gap_cycle": geo.gap_cycle(),
        "ball_margin": hyperbolic.ball_margin(geo),
    }


def _envelope(command, cfg, **body):
    return {"command": command, "version": __version__, "config": cfg, **body}


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _geometry_inputs(cfg):
    phi = cfgmod.make_test_function(cfg)
    alpha, how = cfgmod.resolve_alpha(cfg, phi)
    return phi, alpha, how


def cmd_geometry(cfg, out):
    _, alpha, how = _geometry_inputs(cfg)
    geo = hyperbolic.make_geometry(cfg["genus"], alpha, cfg["alpha_prime"])
    res = hyperbolic.identity_residuals(geo)
    rcfg = cfgmod.resolved(cfg, alpha=alpha)
    path = os.path.join(out, "geometry.json")
    _write(path, dumps(_envelope("geometry", rcfg, alpha_resolution=how, geometry=geometry_dict(geo), identity_residuals=res)))
    return [path]


def cmd_certify(cfg, out):
    phi, alpha, how = _geometry_inputs(cfg)
    rep = certificate.check_condition(phi, cfg["genus"], alpha, cfg["alpha_prime"])
    extra = {}
    if cfg["alpha_prime"] is None:
        extra["alpha_star"] = certificate.critical_alpha_for_rayleigh(rep.rayleigh, cfg["genus"])
        if cfg["genus"] == 1:
            extra["alpha_star_closed_form"] = certificate.critical_alpha_closed_form(rep.dirichlet_energy, rep.weighted_l2)
    rcfg = cfgmod.resolved(cfg, alpha=alpha)
    path = os.path.join(out, "certificate.json")
    _write(path, dumps(_envelope("certify", rcfg, alpha_resolution=how, certificate=rep.to_dict(), **extra)))
    return [path]


def _spectrum_kwargs(cfg, alpha):
    return dict(
        genus=cfg["genus"],
        alpha=alpha,
        alpha_prime=cfg["alpha_prime"],
        r0=cfg["end"]["r0"],
        R=cfg["end"]["R"],
        L=cfg["end"]["L"],
        h=cfg["mesh"]["h"],
        k=cfg["solver"]["k"],
        tol=cfg["solver"]["tol"],
        sector=cfg["sector"],
    )


def cmd_spectrum(cfg, out):
    phi, alpha, how = _geometry_inputs(cfg)
    result, extra = spectrum.compute_spectrum(**_spectrum_kwargs(cfg, alpha), bc=cfg["bc"], phi=phi)
    rcfg = cfgmod.resolved(cfg, **{"alpha": alpha, "end.L": result.L})
    path = os.path.join(out, "spectrum.json")
    _write(path, dumps(_envelope("spectrum", rcfg, alpha_resolution=how, spectrum=result.to_dict())))
    paths = [path]
    if cfg["output"]["eigenvector_csv"]:
        p = os.path.join(out, "eigenvector.csv")
        spectrum.write_eigenvector_csv(p, extra["mesh"], extra["P"], extra["V"][:, 0])
        paths.append(p)
    return paths


def cmd_sweep(cfg, out):
    phi = cfgmod.make_test_function(cfg)
    E = certificate.dirichlet_energy(phi)
    W = certificate.weighted_l2(phi)
    rayleigh = E / W
    sw = cfg["sweep"]
    genera = sw["genera"] or [cfg["genus"]]
    rows = []
    for g in genera:
        for a in sw["alphas"]:
            if not a < math.pi / (4 * g):
                continue
            geo = hyperbolic.make_geometry(g, a)
            thr = 1.0 / geo.ell**2
            row = {"genus": g, "alpha": a, "ell": geo.ell, "rayleigh": rayleigh, "threshold": thr,
                   "holds": rayleigh < thr, "lambda_min_odd": None}
            if sw["solve"]:
                kw = _spectrum_kwargs(dict(cfg, genus=g), a)
                res, _ = spectrum.compute_spectrum(**kw, bc=cfg["bc"], phi=phi, l_sequence=False)
                row["lambda_min_odd"] = res.lambda_min
            rows.append(row)
    if not rows:
        raise cfgmod.ConfigError("sweep grid has no admissible (genus, alpha) pair")
    cols = ["genus", "alpha", "ell", "rayleigh", "threshold", "holds", "lambda_min_odd"]
    p_csv = os.path.join(out, "sweep.csv")
    with open(p_csv, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for r in rows:
            w.writerow(["" if r[c] is None else (repr(float(r[c])) if isinstance(r[c], float) else r[c]) for c in cols])
    paths = [p_csv]
    if cfg["output"]["svg"]:
        series = []
        for g in genera:
            sub = [r for r in rows if r["genus"] == g]
            tag = f" (g={g})" if len(genera) > 1 else ""
            xs = [r["alpha"] for r in sub]
            series.append(("1/ell^2" + tag, xs, [r["threshold"] for r in sub]))
            if sw["solve"]:
                series.append(("lambda_min odd" + tag, xs, [r["lambda_min_odd"] for r in sub]))
        series.append(("Rayleigh(phi)", [r["alpha"] for r in rows], [rayleigh] * len(rows)))
        p_svg = os.path.join(out, "sweep.svg")
        _write(p_svg, plot.line_chart(series, title="odd-sector threshold vs alpha", xlabel="alpha", ylabel="energy", logy=True))
        paths.append(p_svg)
    path = os.path.join(out, "sweep.json")
    _write(path, dumps(_envelope("sweep", cfg, rows=rows)))
    return paths + [path]


def cmd_mesh(cfg, out):
    _, alpha, how = _geometry_inputs(cfg)
    kw = _spectrum_kwargs(cfg, alpha)
    L, L_how, notes = spectrum.resolve_truncation(**kw)
    geo = hyperbolic.make_geometry(cfg["genus"], alpha, cfg["alpha_prime"])
    prof = profile_mod.make_profile(cfg["end"]["r0"], cfg["end"]["R"], geo.ell)
    gm = mesh.build_glued_mesh(geo, prof, cfg["mesh"]["h"], L)
    rcfg = cfgmod.resolved(cfg, **{"alpha": alpha, "end.L": L})
    summary = {"n_dof": gm.n_dof, "euler_characteristic": gm.euler_characteristic(), "L_resolution": L_how, "notes": notes}
    path = os.path.join(out, "mesh.json")
    _write(path, dumps(_envelope("mesh", rcfg, alpha_resolution=how, summary=summary, mesh=gm.to_dict())))
    paths = [path]
    if cfg["output"]["profile_csv"]:
        r = np.unique(gm.points[gm.chart == mesh.END, 0])
        p = os.path.join(out, "profile.csv")
        with open(p, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["r", "F"])
            for rv, fv in zip(r, prof.F(r)):
                w.writerow([repr(float(rv)), repr(float(fv))])
        paths.append(p)
    return paths


HANDLERS = {
    "geometry": cmd_geometry,
    "certify": cmd_certify,
    "spectrum": cmd_spectrum,
    "sweep": cmd_sweep,
    "mesh": cmd_mesh,
}


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-c", "--config", help="JSON run configuration (defaults are used for missing keys)")
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="PATH=VALUE",
                        help="override a field, e.g. --set mesh.h=0.03 (value parsed as JSON when possible)")
    common.add_argument("-v", "--verbose", action="store_true")
    ap = argparse.ArgumentParser(prog="cylend", description=__doc__.split("\n")[0])
    ap.add_argument("--version", action="version", version=f"cylend {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=HANDLERS[name].__name__.replace("cmd_", ""))
    return ap


def _status(command, code, reason, message="", artifacts=()):
    return {"status": "ok" if code == 0 else "error", "exit_code": code, "reason": reason,
            "command": command, "message": message, "artifacts": list(artifacts)}


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:  # argparse usage errors
        code = 0 if exc.code in (0, None) else 2
        if code:
            print(dumps(_status(None, 2, "usage", "invalid command line")), end="")
        return code
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    artifacts = []
    try:
        cfg = cfgmod.load_config(args.config, args.overrides)
        out = cfg["output"]["dir"]
        os.makedirs(out, exist_ok=True)
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            artifacts = HANDLERS[args.command](cfg, out)
        status = _status(args.command, 0, "ok", artifacts=artifacts)
    except CylendError as exc:
        status = _status(args.command, exc.exit_code, exc.reason, str(exc))
    except OSError as exc:
        status = _status(args.command, 2, "io", str(exc))
    print(dumps(status), end="")
    return status["exit_code"]


if __name__ == "__main__":
    sys.exit(main())
