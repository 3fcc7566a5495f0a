"""Figure rendering for the CLI report paths (file output only)."""

from __future__ import annotations

import numpy as np
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def save_profile_figure(u, residual, path) -> str:
    g = u.grid
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.4))
    axes[0].plot(g.s, u.psi, lw=1.2)
    axes[0].set_xlabel("s = ln r")
    axes[0].set_ylabel(r"$\psi(s)$")
    axes[0].set_title("Emden-Fowler profile")
    axes[0].grid(True, alpha=0.3)
    axes[1].semilogy(g.s, np.abs(residual.psi) + 1e-300, lw=1.0, color="C3")
    axes[1].set_xlabel("s = ln r")
    axes[1].set_ylabel("|residual|")
    axes[1].set_title("equation residual")
    axes[1].grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)


def save_gamma_figure(curve, path) -> str:
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.4))
    axes[0].semilogx(curve.tau, curve.gamma, lw=1.2)
    for cp in curve.critical_points:
        axes[0].axvline(cp.tau, color="C3", ls="--", lw=0.8)
    axes[0].set_xlabel(r"$\tau$")
    axes[0].set_ylabel(r"$\Gamma_K(\tau)$")
    axes[0].set_title("reduced energy along dilations")
    axes[0].grid(True, alpha=0.3)
    axes[1].semilogx(curve.tau, curve.gamma_prime, lw=1.2, color="C1")
    axes[1].axhline(0.0, color="k", lw=0.6)
    axes[1].set_xlabel(r"$\tau$")
    axes[1].set_ylabel(r"$\Gamma_K'(\tau)$")
    axes[1].grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)


def save_phi_figure(curves, path) -> str:
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.4))
    for curve in curves:
        lbl = f"t={curve.t:g}"
        axes[0].semilogx(curve.mu, curve.phi, lw=1.2, label=lbl)
        axes[1].semilogx(curve.mu, curve.phi_prime, lw=1.2, label=lbl)
        for cp in curve.critical_points:
            axes[1].axvline(cp.mu_t, color="C3", ls="--", lw=0.8)
    axes[0].set_xlabel(r"$\mu$")
    axes[0].set_ylabel(r"$\Phi_t(\mu)$")
    axes[0].legend(fontsize=8)
    axes[0].grid(True, alpha=0.3)
    axes[1].axhline(0.0, color="k", lw=0.6)
    axes[1].set_xlabel(r"$\mu$")
    axes[1].set_ylabel(r"$\Phi_t'(\mu)$")
    axes[1].grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)


def save_continuation_figure(run, path) -> str:
    ts = [s.t for s in run.states]
    fig, axes = plt.subplots(1, 3, figsize=(12, 3.4))
    axes[0].plot(ts, [s.diagnostics.sandwich_C for s in run.states], "o-", ms=3)
    axes[0].set_xlabel("t")
    axes[0].set_ylabel("sandwich constant")
    axes[0].grid(True, alpha=0.3)
    axes[1].plot(ts, [s.diagnostics.norm_E for s in run.states], "o-", ms=3, color="C1")
    axes[1].set_xlabel("t")
    axes[1].set_ylabel("E-norm")
    axes[1].grid(True, alpha=0.3)
    final = run.states[-1]
    g = final.profile.grid
    axes[2].plot(g.s, final.profile.psi, lw=1.2, color="C2")
    axes[2].set_xlabel("s = ln r")
    axes[2].set_ylabel(r"$\psi$ at final t")
    axes[2].grid(True, alpha=0.3)
    fig.suptitle(f"continuation: {run.status.value}", fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)


def save_boundary_figure(sigmas, values, reports, path) -> str:
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.4))
    axes[0].loglog(sigmas, np.abs(values) + 1e-300, "o-", ms=3)
    axes[0].set_xlabel(r"$\sigma$")
    axes[0].set_ylabel("|boundary term|")
    axes[0].grid(True, alpha=0.3, which="both")
    if reports:
        rs = [r.sigma for r in reports]
        axes[1].loglog(rs, [max(r.relative_residual, 1e-300) for r in reports],
                       "s-", ms=3, color="C3")
        axes[1].set_xlabel(r"$\sigma$")
        axes[1].set_ylabel("identity relative residual")
        axes[1].grid(True, alpha=0.3, which="both")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)
