"""Minimal log-log SVG plots with the fitted line and residuals."""
from __future__ import annotations

from .dimension import LogLogFit

W, H, PAD = 480, 360, 48


def loglog_svg(fit: LogLogFit, title: str = "", xlabel: str = "log(1/eps)", ylabel: str = "log N") -> str:
    xs = [p[0] for p in fit.points]
    ys = [p[1] for p in fit.points]
    line = [fit.slope * x + fit.intercept for x in xs]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys + line), max(ys + line)
    if x1 == x0:
        x1 = x0 + 1
    if y1 == y0:
        y1 = y0 + 1

    def sx(x):
        return PAD + (x - x0) / (x1 - x0) * (W - 2 * PAD)

    def sy(y):
        return H - PAD - (y - y0) / (y1 - y0) * (H - 2 * PAD)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<rect width="{W}" height="{H}" fill="white"/>',
        f'<line x1="{PAD}" y1="{H - PAD}" x2="{W - PAD}" y2="{H - PAD}" stroke="black"/>',
        f'<line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{H - PAD}" stroke="black"/>',
        f'<text x="{W / 2:.1f}" y="{H - 12}" text-anchor="middle" font-size="12">{xlabel}</text>',
        f'<text x="14" y="{H / 2:.1f}" text-anchor="middle" font-size="12" transform="rotate(-90 14 {H / 2:.1f})">{ylabel}</text>',
        f'<text x="{W / 2:.1f}" y="20" text-anchor="middle" font-size="13">{title}</text>',
        f'<line x1="{sx(x0):.2f}" y1="{sy(fit.slope * x0 + fit.intercept):.2f}" x2="{sx(x1):.2f}" '
        f'y2="{sy(fit.slope * x1 + fit.intercept):.2f}" stroke="steelblue" stroke-width="2"/>',
    ]
    for x, y, yl in zip(xs, ys, line):
        out.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3" fill="crimson"><title>residual {y - yl:.3e}</title></circle>')
    out.append(
        f'<text x="{W - PAD}" y="{PAD}" text-anchor="end" font-size="11">slope {fit.slope:.6f}  r2 {fit.r_squared:.6f}  '
        f"max |resid| {max(abs(y - yl) for y, yl in zip(ys, line)):.2e}</text>"
    )
    out.append("</svg>")
    return "\n".join(out) + "\n"
