"""SVG figures rebuilt from sweep CSV files alone."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .sweeps import read_csv  # noqa: E402

# fixed ids and no timestamp so identical CSVs give identical SVGs
plt.rcParams["svg.hashsalt"] = "rydberg-cavity"
plt.rcParams["svg.fonttype"] = "path"


def _save(fig, svg_path: Path) -> Path:
    svg_path = Path(svg_path)
    svg_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(svg_path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return svg_path


def g2zero_svg(csv_path: Path, svg_path: Path) -> Path:
    """g2(0) against theta with the photon-pair / photon-number panel below."""
    data = read_csv(csv_path)
    theta = data["theta"]
    fig, (top, bottom) = plt.subplots(2, 1, figsize=(6.5, 7), sharex=True)
    top.semilogy(theta, data["g2_numeric"], lw=2, label="numerical")
    top.semilogy(theta, data["g2_perturbative"], "--", lw=1, label="perturbative")
    top.axhline(1.0, color="grey", lw=0.5)
    top.set_ylabel(r"$g^{(2)}(0)$")
    top.legend(frameon=False)
    g2 = np.nan_to_num(data["g2_numeric"], nan=-np.inf)
    peak = theta[int(np.argmax(g2))]
    bottom.semilogy(theta, data["pairs_ss"], lw=1, label=r"$\langle a^\dagger a^\dagger a a\rangle$")
    bottom.semilogy(theta, data["n_ss"] ** 2, lw=2.5, label=r"$\langle a^\dagger a\rangle^2$")
    bottom.axvline(peak, color="k", lw=0.8)
    bottom.set_xlabel(r"$\theta = (\Delta_c - \Delta_c^{(0)})/\gamma_e$")
    bottom.legend(frameon=False)
    fig.tight_layout()
    return _save(fig, svg_path)


def g2tau_svg(csv_path: Path, svg_path: Path) -> Path:
    data = read_csv(csv_path)
    fig, ax = plt.subplots(figsize=(6.5, 4))
    ax.plot(data["tau"], data["g2"], lw=1.5)
    ax.axhline(1.0, color="grey", lw=0.5)
    ax.set_xlabel(r"$\tau\gamma_e$")
    ax.set_ylabel(r"$g^{(2)}(\tau)$")
    fig.tight_layout()
    return _save(fig, svg_path)


def comparison_svg(csv_path: Path, svg_path: Path) -> Path:
    data = read_csv(csv_path)
    fig, ax = plt.subplots(figsize=(6.5, 4))
    labels = {"g2_spin": "spin bubbles", "g2_boson_kbar": r"two bosons, $\bar\kappa$",
              "g2_boson_kbarprime": r"two bosons, $\bar\kappa'$"}
    for col, label in labels.items():
        ax.semilogy(data["theta"], data[col], label=label)
    ax.axhline(1.0, color="grey", lw=0.5)
    ax.set_xlabel(r"$\theta$")
    ax.set_ylabel(r"$g^{(2)}(0)$")
    ax.legend(frameon=False)
    fig.tight_layout()
    return _save(fig, svg_path)
