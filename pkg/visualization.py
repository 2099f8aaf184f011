"""
Reports and Plot Data for the Rearrangement Lab

Console tables for humans, and two-column CSV / minimal SVG line charts for
the Θ curve, the separation constant curve, superadditivity growth and the
invariance sweep.
"""

import math
from typing import Any, Dict, List, Optional, Sequence, Tuple
from xml.sax.saxutils import escape

from artifacts import format_cell, write_csv
from errors import PreconditionError

PLOT_KINDS = {
    'theta-curve': ('lambda', 'theta'),
    'epsilon-curve': ('lambda0', 'epsilon'),
    'superadd-growth': ('k', 'ratio'),
    'invariance': ('kappa', 'grad_rel_err', 'qnorm_rel_err'),
}


class ReportPrinter:
    """Prints lab results as boxed console tables"""

    @staticmethod
    def print_banner(title: str):
        print("\n" + "=" * 78)
        print(title.upper())
        print("=" * 78)

    @staticmethod
    def print_record(title: str, record: Dict[str, Any]):
        """Key/value table of a result record"""

        ReportPrinter.print_banner(title)
        for key, value in record.items():
            key_formatted = key.replace('_', ' ').title()
            if isinstance(value, float):
                print(f"{key_formatted:<30} {value:.12g}")
            elif isinstance(value, (list, tuple)) and len(value) > 6:
                shown = ", ".join(format_cell(v) for v in value[:6])
                print(f"{key_formatted:<30} [{shown}, … {len(value) - 6} more]")
            else:
                print(f"{key_formatted:<30} {value}")
        print("=" * 78 + "\n")

    @staticmethod
    def print_table(title: str, columns: Sequence[str], rows: Sequence[Sequence[Any]]):
        """Column table, numbers in %.6g"""

        ReportPrinter.print_banner(title)
        width = max(14, max((len(c) for c in columns), default=0) + 2)
        print("".join(f"{c:<{width}}" for c in columns))
        print("-" * 78)
        for row in rows:
            cells = [f"{v:.6g}" if isinstance(v, float) else str(v) for v in row]
            print("".join(f"{c:<{width}}" for c in cells))
        if not rows:
            print("(no rows)")
        print("=" * 78 + "\n")

    @staticmethod
    def print_verdict(title: str, ok: Optional[bool], detail: str = ''):
        status = "✓ YES" if ok else ("? INCONCLUSIVE" if ok is None else "✗ NO")
        print(f"{title:<30} {status} {detail}")

    @staticmethod
    def print_growth_bars(series: Sequence[Tuple[Any, float]]):
        """One bar per (label, value), scaled to the largest finite value"""

        finite = [v for _, v in series if math.isfinite(v)]
        top = max(finite) if finite else 1.0
        for label, value in series:
            length = int(40 * value / top) if math.isfinite(value) and top > 0 else 40
            print(f"{str(label):<12} {'█' * length} {value:.6g}")


def emit_plotdata(
    kind: str,
    rows: Sequence[Sequence[Any]],
    csv_path: Optional[str] = None,
    svg_path: Optional[str] = None
) -> List[str]:
    """Write the plot table for `kind` as CSV, and as an SVG line chart when svg_path is given"""
    if kind not in PLOT_KINDS:
        raise PreconditionError(f"unknown plot kind {kind!r}; expected one of {sorted(PLOT_KINDS)}")
    columns = list(PLOT_KINDS[kind])
    write_csv(columns, rows, csv_path)
    if svg_path is not None:
        with open(svg_path, 'w') as f:
            f.write(svg_line_chart(columns, rows, title=kind))
    return columns


def svg_line_chart(
    columns: Sequence[str],
    rows: Sequence[Sequence[Any]],
    title: str = '',
    width: int = 640,
    height: int = 400
) -> str:
    """Polyline per y-column against the first column, with two axes and min/max labels"""
    margin = 48
    points = [[float(v) for v in row] for row in rows]
    finite = [p for p in points if all(math.isfinite(v) for v in p)]
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<text x="{margin}" y="20">{escape(title)}</text>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" stroke="black"/>',
    ]
    if finite:
        xs = [p[0] for p in finite]
        ys = [v for p in finite for v in p[1:]]
        x_lo, x_hi = min(xs), max(xs)
        y_lo, y_hi = min(ys), max(ys)
        x_span = (x_hi - x_lo) or 1.0
        y_span = (y_hi - y_lo) or 1.0

        def sx(x: float) -> float:
            return margin + (x - x_lo) / x_span * (width - 2 * margin)

        def sy(y: float) -> float:
            return height - margin - (y - y_lo) / y_span * (height - 2 * margin)

        colours = ('black', 'gray', 'silver')
        for j in range(1, len(columns)):
            path = " ".join(f"{sx(p[0]):.2f},{sy(p[j]):.2f}" for p in finite)
            lines.append(f'<polyline fill="none" stroke="{colours[(j - 1) % 3]}" points="{path}"/>')
        lines.append(f'<text x="{margin}" y="{height - margin + 16}">{x_lo:.4g}</text>')
        lines.append(f'<text x="{width - margin}" y="{height - margin + 16}">{x_hi:.4g}</text>')
        lines.append(f'<text x="4" y="{height - margin}">{y_lo:.4g}</text>')
        lines.append(f'<text x="4" y="{margin}">{y_hi:.4g}</text>')
    lines.append(f'<text x="{width // 2}" y="{height - 8}">{escape(columns[0])}</text>')
    lines.append('</svg>')
    return "\n".join(lines) + "\n"
