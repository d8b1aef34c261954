"""Text and LaTeX rendering of pipeline reports.

The exact kernel works on the internal positive variable w1; every LaTeX
display unwinds the sign convention back to the published coordinate,
t1 = sign * w1: integer powers of w1 fold the sign into the coefficient,
irrational powers render as (-t_1)^q on the plus branch (where t1 < 0 on the
real chart) and as t_1^q on the minus branch.
"""

from __future__ import annotations

from fractions import Fraction

from .expressions import GenExpr, RatExpr
from .quadfield import QONE, QuadExt


def _latex_fraction(x: Fraction) -> str:
    if x.denominator == 1:
        return str(x.numerator)
    sign = "-" if x < 0 else ""
    return f"{sign}\\frac{{{abs(x.numerator)}}}{{{x.denominator}}}"


def latex_quad(q: QuadExt) -> str:
    a, b = q.a, q.b
    if not b:
        return _latex_fraction(a)
    if b == 1:
        bs = "\\sqrt{3}"
    elif b == -1:
        bs = "-\\sqrt{3}"
    else:
        bs = f"{_latex_fraction(b)} \\sqrt{{3}}"
    if not a:
        return bs
    joiner = "" if bs.startswith("-") else "+"
    return f"{_latex_fraction(a)}{joiner}{bs}"


def _latex_exponent(q: QuadExt) -> str:
    if q.is_integer:
        return str(q.as_int())
    return latex_quad(q)


def latex_const(c) -> str:
    """A RadicalConstant as a LaTeX product-of-powers sum."""
    if c.is_zero:
        return "0"
    parts = []
    for unit, coeff in c.sorted_terms():
        factors = []
        if unit.is_one or not coeff.is_one:
            factors.append(latex_quad(coeff) if (coeff.is_rational and coeff.b == 0)
                           or unit.is_one else f"\\left({latex_quad(coeff)}\\right)")
        for p, e in unit.exps:
            factors.append(f"{p}^{{{_latex_exponent(e)}}}")
        parts.append(" \\cdot ".join(factors))
    return " + ".join(parts)


DEFAULT_SYMBOLS = {
    "x1": "x_1", "x2": "x_2", "u1": "u_1", "u2": "u_2", "u3": "u_3",
    "w1": "t_1", "t2": "t_2", "z1": "z_1", "z2": "z_2",
    "lam": "\\lambda", "f": "f", "fp": "f'", "fpp": "f''",
}


def latex_genexpr(expr: GenExpr, flip: dict | None = None,
                  symbols: dict | None = None) -> str:
    """Render a GenExpr; `flip` maps internal variable names rendered as the
    negative of the published coordinate (e.g. {"w1": True} on the plus branch)."""
    flip = flip or {}
    symbols = symbols or DEFAULT_SYMBOLS
    if expr.is_zero:
        return "0"
    pieces = []
    for exps, coeff in expr.sorted_terms():
        factors = []
        for v, e in zip(expr.table.vars, exps):
            if e.is_zero:
                continue
            sym = symbols.get(v.name, v.name)
            if flip.get(v.name):
                if e.is_integer:
                    if e.as_int() % 2:
                        coeff = -coeff
                else:
                    sym = f"\\left(-{sym}\\right)"
            if e.is_one:
                factors.append(sym)
            else:
                factors.append(f"{sym}^{{{_latex_exponent(e)}}}")
        cs = latex_const(coeff)
        if cs == "1" and factors:
            cs = ""
        elif cs == "-1" and factors:
            cs = "-"
        elif factors and (" + " in cs or "\\cdot" in cs or "-" in cs.lstrip("-")
                          or "+" in cs):
            cs = f"\\left({cs}\\right) "
        elif factors:
            cs = cs + " \\, "
        pieces.append(cs + " ".join(factors) if factors else cs)
    out = pieces[0]
    for p in pieces[1:]:
        out += p if p.startswith("-") else " + " + p
    return out


def latex_ratexpr(expr: RatExpr, flip=None, symbols=None) -> str:
    num = latex_genexpr(expr.num, flip, symbols)
    if expr.den.is_constant() and expr.den.constant_value().is_one:
        return num
    den = latex_genexpr(expr.den, flip, symbols)
    return f"\\frac{{{num}}}{{{den}}}"


def latex_matrix(mat, flip=None, symbols=None, index_signs=None) -> str:
    """Render a matrix; `index_signs` carries the per-coordinate sign of the
    chart unwinding (entry (i, j) is scaled by sign_i * sign_j), so that a
    matrix computed on the internal chart displays its published-chart values."""
    rows = []
    for i, row in enumerate(mat):
        rendered = []
        for j, e in enumerate(row):
            entry = RatExpr.of(e)
            if index_signs is not None:
                s = index_signs[i] * index_signs[j]
                if s < 0:
                    entry = -entry
            rendered.append(latex_ratexpr(entry, flip, symbols))
        rows.append(" & ".join(rendered))
    body = " \\\\\n".join(rows)
    return f"\\begin{{pmatrix}}\n{body}\n\\end{{pmatrix}}"


# -- documents ------------------------------------------------------------------------


def text_document(reports) -> str:
    lines = []
    for rep in reports:
        lines.append(f"== n = {rep.n}, branch = {rep.branch} ==")
        for stage in rep.stages:
            mark = "PASS" if stage.passed else "FAIL"
            extra = _stage_highlight(stage)
            lines.append(f"[{mark}] {stage.name}{extra}")
        for disc in rep.discrepancies:
            lines.append(f"[FLAG] {disc['kind']}: {disc['note']}")
        num = rep.numeric
        lines.append(
            f"numeric backstop: {num['checks']} checks, max |err| = {num['max_abs']} "
            f"(tolerance {num['tolerance']}); "
            f"fd christoffel rel err = {num.get('fd_christoffel_rel_err', 'n/a')}")
        lines.append(f"overall: {'PASS' if rep.passed else 'FAIL'}")
        lines.append("")
    return "\n".join(lines)


def _stage_highlight(stage) -> str:
    d = stage.details
    if stage.name == "group-relations":
        return f"  (order {d['order']})"
    if stage.name == "quasihomogeneity":
        return f"  (charge {d.get('charge')})"
    if stage.name == "potential-reconstruction" and d.get("charge"):
        return f"  (degrees {d.get('degrees')})"
    if stage.name == "normal-form" and d.get("exponent"):
        return f"  (k = {d['exponent']})"
    return ""


_PREAMBLE = """\\documentclass{article}
\\usepackage{amsmath}
\\begin{document}
"""


def latex_document(reports) -> str:
    chunks = [_PREAMBLE]
    for rep in reports:
        chunks.append(_latex_report(rep))
    chunks.append("\\end{document}\n")
    return "\n".join(chunks)


def _latex_report(rep) -> str:
    flip = {"w1": rep.branch == "plus", "z1": rep.branch == "plus"}
    out = [f"\\section*{{$n = {rep.n}$, {rep.branch} branch}}"]
    verdicts = ", ".join(
        f"{s.name}: {'pass' if s.passed else 'FAIL'}" for s in rep.stages)
    out.append(f"Stage verdicts: {verdicts}.")
    objs = rep.objects
    out.append("Second metric on the quotient chart:")
    out.append("\\begin{equation*}(\\cdot,\\cdot)_2 = "
               + latex_matrix(objs["quotient_metric"].mat) + "\\end{equation*}")
    out.append("Lie derivative along $f(u_1)\\,\\partial_{u_2}$:")
    out.append("\\begin{equation*}(\\cdot,\\cdot)_1 = "
               + latex_matrix(objs["jet_lie_matrix"]) + "\\end{equation*}")
    out.append("First metric of the pencil:")
    out.append("\\begin{equation*}(\\cdot,\\cdot)_1 = "
               + latex_matrix(objs["first_metric"].mat) + "\\end{equation*}")
    if objs.get("potential") is not None:
        signs = (-1 if rep.branch == "plus" else 1, 1)
        out.append("Flat metric and second metric in flat coordinates:")
        out.append("\\begin{equation*}(\\cdot,\\cdot)_1 = "
                   + latex_matrix(objs["eta_flat"].mat, flip, index_signs=signs)
                   + ",\\qquad (\\cdot,\\cdot)_2 = "
                   + latex_matrix(objs["g2_flat"].mat, flip, index_signs=signs)
                   + "\\end{equation*}")
        out.append("Reconstructed potential:")
        out.append("\\begin{equation*}\\mathbb{F} = "
                   + latex_genexpr(objs["potential"], flip) + "\\end{equation*}")
        nf = objs.get("normal_form")
        if nf is not None and nf.exponent is not None:
            out.append("Normal form $z_1^{k} + \\tfrac{1}{2} z_2^2 z_1$ with $k = "
                       + latex_quad(nf.exponent) + "$.")
    for disc in rep.discrepancies:
        out.append(f"\\emph{{Flag ({disc['kind']})}}: {disc['note']}.")
    return "\n".join(out) + "\n"
