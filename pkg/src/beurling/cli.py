"""Command-line entry point: ``beurling <command> --config run.json``.

Each command writes one CSV (to ``--out``/``output_path``, or standard
output when neither is given) and prints a one-line summary.  Exit codes:
0 success, 1 configuration/range/domain error, 2 resource cap, 3 numerical
failure.  Hypothesis warnings go to standard error and never change the
exit code.
"""

from __future__ import annotations

import argparse
import dataclasses
import io
import math
import sys
import warnings

import numpy as np

from . import arithmetic, counting, meanvalue, storage, transforms
from ._numeric import fmt
from .bell import bell_f_from_g, bell_g_from_f
from .config import parse_config
from .errors import ConfigError, DomainError, HypothesisWarning, NumericalError, RangeError, ResourceError
from .system import build_system

COMMANDS = ("gen", "diag", "mobius", "meanvalue", "zeta", "perron", "equiv", "convert")

EXIT_CODES = ((ResourceError, 2), (NumericalError, 3), (ConfigError, 1), (RangeError, 1), (DomainError, 1))


class Run:
    """Shared state of one command invocation."""

    def __init__(self, config, quiet=False, err=None):
        self.config = config
        self.quiet = quiet
        self.err = err or sys.stderr
        self._system = None
        self._table = None

    def notice(self, msg):
        if not self.quiet:
            print(msg, file=self.err)

    @property
    def system(self):
        if self._system is None:
            spec = self.config.system
            if spec.kind != "explicit" and spec.limit is None:
                spec = dataclasses.replace(spec, limit=self.config.x_max)
            self._system = build_system(spec)
        return self._system

    @property
    def table(self):
        if self._table is None:
            caps = self.config.caps
            self._table = storage.cached_table(
                self.system,
                self.config.x_max,
                self.config.cache_dir,
                cap=caps.max_entries,
                max_bytes=caps.max_memory_estimate,
                notice=self.notice,
            )
        return self._table

    def grid(self):
        return self.config.grid.values(self.config.x_max)


def _cmd_gen(run, out):
    table = run.table
    storage.write_table(table, out)
    return f"N({run.config.x_max:g}) = {len(table)} entries; digest {table.digest()[:16]}"


def _cmd_diag(run, out):
    rep = counting.diagnostics(run.system, run.table, run.grid())
    rep.write_csv(out)
    for name, ok in rep.hypothesis_flags.items():
        if not ok:
            run.notice(f"warning: hypothesis check '{name}' fails on this grid (empirical, finite x)")
    flags = " ".join(f"{k}={'yes' if v else 'no'}" for k, v in rep.hypothesis_flags.items())
    return f"a_hat = {rep.density_estimate:.6g}, chebyshev_sup = {rep.chebyshev_sup:.4g}; {flags}"


def _cmd_mobius(run, out):
    mv = arithmetic.mobius(run.table, cap=run.config.caps.max_entries)
    mv.write_csv(out)
    x = run.config.x_max
    M = mv.summatory(x).real
    return f"M({x:g}) = {M:.0f}, M(x)/x = {M / x:.3g}"


def _alpha_choice(run, f):
    alpha = run.config.alpha
    if isinstance(alpha, list):
        search = meanvalue.find_alpha(f, run.system, alpha, run.config.x_max)
        if search.note:
            run.notice(f"note: {search.note}")
        return search.best_alpha
    return float(alpha)


def _cmd_meanvalue(run, out):
    f = run.config.make_function()
    alpha = _alpha_choice(run, f)
    cmp = meanvalue.compare(f, run.table, alpha, run.grid(), mode=run.config.mode, density=run.config.a)
    cmp.write_csv(out)
    last = cmp.rows[-1]
    msg = (
        f"alpha = {alpha:g}, criterion {cmp.verdict} (heuristic), mode {cmp.mode}: "
        f"G(x)/x = {_c(last.G_over_x)}, predicted {_c(last.prediction_over_x)}, abs_err = {last.abs_err:.3g}"
    )
    if alpha == 0:
        try:
            w = meanvalue.wirsing(f, run.system, last.x, density=cmp.prediction.density or 1.0)
            msg += f"; wirsing limit = {w:.6g}"
        except DomainError:
            pass
    return msg


def _c(z):
    z = complex(z)
    return f"{z.real:.6g}" if z.imag == 0 else f"{z.real:.6g}{z.imag:+.6g}i"


def _cmd_zeta(run, out):
    a = run.config.a if run.config.a is not None else counting.density_estimate(run.table)
    rows = transforms.zeta_residue_scan(run.table, run.config.sigma_list, a, run.config.t_list)
    transforms.write_scan_csv(rows, out)
    worst = rows[-1]
    return f"a = {a:.6g}; at sigma = {worst.sigma:g}, t = {worst.t:g}: |(sigma-1)(zeta - a/(s-1))| = {abs(worst.scaled):.3g}"


def _cmd_perron(run, out):
    c = run.config.contour
    res = transforms.perron_check(run.config.make_function(), run.table, transforms.ContourSpec(c.x, c.T, c.step))
    res.write_csv(out)
    if res.flagged:
        run.notice(f"warning: contour and direct sides disagree (rel_err {res.rel_err:.3g}); T may be too small")
    return f"F(x)/x = {_c(res.direct)}, contour = {_c(res.contour)}, rel_err = {res.rel_err:.3g}, halving = {res.halving_error:.2g}"


def _cmd_equiv(run, out):
    f = run.config.make_function()
    alpha = _alpha_choice(run, f)
    xs = [x for x in run.grid() if x > math.e]
    rows = transforms.equivalence_report(f, run.table, run.config.c, alpha, xs)
    transforms.write_equivalence_csv(rows, out)
    r = rows[-1]
    return f"x = {r.x:g}: lhs_resid = {r.lhs_resid:.3g}, rhs_resid = {r.rhs_resid:.3g}"


def _cmd_convert(run, out):
    """Bell conversion at one prime: the defining side is read, the other computed."""
    f = run.config.make_function()
    n = run.config.nu_max
    nu = np.arange(1, n + 1)
    kk = np.full(n, run.config.prime_index - 1)
    if f.kind == "table":
        source = f.side
    else:
        source = "f" if f.kind == "completely_multiplicative" else "g"

    def given(which):
        if f.shift:
            return getattr(f, f"{which}_values")(run.system, kk, nu)
        return f._base(which, kk, nu)

    if source == "f":
        fv = given("f")
        g = bell_g_from_f(fv)
    else:
        g = given("g")
        fv = bell_f_from_g(g)
    out.write("nu,re_f,im_f,re_g,im_g\n")
    for j in range(n):
        out.write(f"{j + 1},{fmt(fv[j].real)},{fmt(fv[j].imag)},{fmt(g[j].real)},{fmt(g[j].imag)}\n")
    return "f = (" + ", ".join(_c(complex(round(v.real, 12), round(v.imag, 12)) + 0) for v in fv) + ")"


HANDLERS = {
    "gen": _cmd_gen,
    "diag": _cmd_diag,
    "mobius": _cmd_mobius,
    "meanvalue": _cmd_meanvalue,
    "zeta": _cmd_zeta,
    "perron": _cmd_perron,
    "equiv": _cmd_equiv,
    "convert": _cmd_convert,
}


def _parse_alpha_flag(text):
    try:
        if "," in text:
            return [float(v) for v in text.split(",")]
        return float(text)
    except ValueError:
        raise ConfigError(f"--alpha: expected a number or comma-separated list, got {text!r}") from None


def run_command(name, config, out_path=None, quiet=False, stdout=None, stderr=None):
    """Run one command; returns the process exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    run = Run(config, quiet, stderr)
    path = out_path or config.output_path
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", HypothesisWarning)
            buf = io.StringIO()
            summary = HANDLERS[name](run, buf)
        for w in caught:
            if issubclass(w.category, HypothesisWarning):
                run.notice(f"warning: {w.message}")
            else:
                warnings.showwarning(w.message, w.category, w.filename, w.lineno)
        if path in (None, "-"):
            stdout.write(buf.getvalue())
            target = stderr
        else:
            with open(path, "w", newline="\n") as fh:
                fh.write(buf.getvalue())
            target = stdout
        if not quiet:
            print(summary, file=target)
        return 0
    except Exception as exc:
        for cls, code in EXIT_CODES:
            if isinstance(exc, cls):
                print(f"error: {exc}", file=stderr)
                return code
        raise


def build_parser():
    p = argparse.ArgumentParser(prog="beurling", description="Computations on Beurling generalized number systems.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, metavar="PATH", help="JSON run configuration")
    p.add_argument("--xmax", type=float, help="override x_max")
    p.add_argument("--out", metavar="PATH", help="CSV destination ('-' for standard output)")
    p.add_argument("--alpha", help="override alpha: a number or a comma-separated grid")
    p.add_argument("--quiet", action="store_true", help="suppress the summary line and notices")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        with open(args.config) as fh:
            text = fh.read()
    except OSError as e:
        print(f"error: cannot read config: {e}", file=sys.stderr)
        return 1
    try:
        config = parse_config(text)
        overrides = {}
        if args.xmax is not None:
            if args.xmax < 2:
                raise ConfigError("--xmax: must be >= 2")
            overrides["x_max"] = args.xmax
        if args.alpha is not None:
            overrides["alpha"] = _parse_alpha_flag(args.alpha)
        config = config.with_overrides(**overrides)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return run_command(args.command, config, args.out, args.quiet)


if __name__ == "__main__":
    sys.exit(main())
