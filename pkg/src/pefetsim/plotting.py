"""Static figure output (PNG) for the CLI."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

_STYLE = {"HD": "o-", "TALL": "s-", "WIDE": "^-", "CC": "d-"}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_iv(sweep: dict, path: str | Path) -> None:
    fig, ax = plt.subplots(figsize=(4.5, 3.5))
    ax.semilogy(sweep["v_gs"], sweep["i_lrs"], label="+P (LRS)")
    ax.semilogy(sweep["v_gs"], sweep["i_hrs"], label="-P (HRS)")
    ax.semilogy(sweep["v_gs"], sweep["i_baseline"], "k--", lw=0.8, label="unstrained")
    ax.set_xlabel("V_GS (V)")
    ax.set_ylabel("I_D (A)")
    ax.legend(frameon=False)
    _save(fig, path)


def plot_kappa_device(rows: list[dict], path: str | Path) -> None:
    k = [r["kappa"] for r in rows]
    fig, (a1, a2) = plt.subplots(1, 2, figsize=(8, 3.3))
    a1.plot(k, [r["sigma_tmd"] / 1e9 for r in rows], "o-")
    a1.set_xlabel("kappa")
    a1.set_ylabel("sigma_TMD (GPa)")
    a2.plot(k, [r["ratio"] for r in rows], "o-")
    a2.set_xlabel("kappa")
    a2.set_ylabel("I_LRS / I_HRS")
    _save(fig, path)


def plot_sweep(table: dict[str, dict[float, float]], ylabel: str, path: str | Path,
               log: bool = False) -> None:
    """One line per architecture; ``table[arch][kappa] = value``."""
    fig, ax = plt.subplots(figsize=(4.5, 3.5))
    for arch, pts in table.items():
        ks = sorted(pts)
        ax.plot(ks, [pts[k] for k in ks], _STYLE.get(arch, "o-"), label=arch)
    if log:
        ax.set_yscale("log")
    ax.set_xlabel("kappa")
    ax.set_ylabel(ylabel)
    ax.legend(frameon=False)
    _save(fig, path)
