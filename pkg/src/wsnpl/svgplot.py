"""Self-contained SVG line charts for sweep results.

Hand-rolled on purpose: the files embed no external assets and render the
same bytes for the same inputs, so plots can sit next to CSVs in version
control.  They are a convenience, never an acceptance artifact.
"""

from __future__ import annotations

from .experiments import SweepResult

_WIDTH = 640
_PANEL_H = 300
_MARGIN_L = 70
_MARGIN_R = 20
_MARGIN_T = 40
_MARGIN_B = 45


def _ticks(lo: float, hi: float, n: int = 5):
    if hi <= lo:
        pad = 1.0 if lo == 0.0 else abs(lo) * 0.1
        lo, hi = lo - pad, hi + pad
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)], lo, hi


def _panel(xs, ys, x_label: str, y_label: str, title: str, y_offset: int) -> str:
    plot_w = _WIDTH - _MARGIN_L - _MARGIN_R
    plot_h = _PANEL_H - _MARGIN_T - _MARGIN_B
    x_ticks, x_lo, x_hi = _ticks(min(xs), max(xs))
    y_ticks, y_lo, y_hi = _ticks(min(ys), max(ys))

    def px(x):
        return _MARGIN_L + plot_w * (x - x_lo) / (x_hi - x_lo)

    def py(y):
        return y_offset + _MARGIN_T + plot_h * (1.0 - (y - y_lo) / (y_hi - y_lo))

    parts = [f'<text x="{_MARGIN_L}" y="{y_offset + 24}" font-size="14" '
             f'font-family="sans-serif">{title}</text>']
    axis_y = y_offset + _MARGIN_T + plot_h
    parts.append(f'<line x1="{_MARGIN_L}" y1="{axis_y}" x2="{_WIDTH - _MARGIN_R}" '
                 f'y2="{axis_y}" stroke="black"/>')
    parts.append(f'<line x1="{_MARGIN_L}" y1="{y_offset + _MARGIN_T}" '
                 f'x2="{_MARGIN_L}" y2="{axis_y}" stroke="black"/>')
    for t in x_ticks:
        x = px(t)
        parts.append(f'<line x1="{x:.2f}" y1="{axis_y}" x2="{x:.2f}" '
                     f'y2="{axis_y + 5}" stroke="black"/>')
        parts.append(f'<text x="{x:.2f}" y="{axis_y + 18}" font-size="11" '
                     f'font-family="sans-serif" text-anchor="middle">{t:.4g}</text>')
    for t in y_ticks:
        y = py(t)
        parts.append(f'<line x1="{_MARGIN_L - 5}" y1="{y:.2f}" x2="{_MARGIN_L}" '
                     f'y2="{y:.2f}" stroke="black"/>')
        parts.append(f'<text x="{_MARGIN_L - 8}" y="{y + 4:.2f}" font-size="11" '
                     f'font-family="sans-serif" text-anchor="end">{t:.4g}</text>')
    parts.append(f'<text x="{_MARGIN_L + plot_w / 2:.2f}" y="{axis_y + 36}" '
                 f'font-size="12" font-family="sans-serif" '
                 f'text-anchor="middle">{x_label}</text>')
    parts.append(f'<text x="16" y="{y_offset + _MARGIN_T + plot_h / 2:.2f}" '
                 f'font-size="12" font-family="sans-serif" text-anchor="middle" '
                 f'transform="rotate(-90 16 {y_offset + _MARGIN_T + plot_h / 2:.2f})"'
                 f'>{y_label}</text>')
    pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys))
    parts.append(f'<polyline points="{pts}" fill="none" stroke="#1f6fb4" '
                 f'stroke-width="1.5"/>')
    for x, y in zip(xs, ys):
        parts.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="3" '
                     f'fill="#1f6fb4"/>')
    return "\n".join(parts)


def render_sweep_svg(result: SweepResult) -> str:
    xs = [row.r_ratio for row in result.rows]
    savings = [row.mean_savings for row in result.rows]
    active = [row.mean_active for row in result.rows]
    body = "\n".join([
        _panel(xs, savings, "distance spread R", "mean savings",
               "Relative power savings vs uniform transmission", 0),
        _panel(xs, active, "distance spread R", "mean active sensors",
               "Active sensor count", _PANEL_H),
    ])
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" '
            f'height="{2 * _PANEL_H}" viewBox="0 0 {_WIDTH} {2 * _PANEL_H}">\n'
            f'<rect width="{_WIDTH}" height="{2 * _PANEL_H}" fill="white"/>\n'
            f'{body}\n</svg>\n')


def write_sweep_svg(path: str, result: SweepResult) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(render_sweep_svg(result))
