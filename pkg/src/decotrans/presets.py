"""Built-in experiment configurations reproducing the standard figure layouts."""

from __future__ import annotations

from .config import ExperimentConfig, parse_config

_P_GRID = ", ".join(f"{k / 50:.2f}" for k in range(1, 51))

PRESETS: dict[str, str] = {
    # resistivity of the infinite chain vs degree of decoherence
    "fig1": f"""
name = "fig1"
kind = "analytic"

[lattice]
N = [1000]

[disorder]
sigma = [0.5, 1.0]

[decoherence]
model = "bernoulli"
p = [{_P_GRID}]

[engine]
localized_ok = true

[analytic]
observables = ["rho_random", "rho_hom"]

[output]
directory = "results/fig1"
x_axis = "p"
""",
    # attached vs bond-replacing probes, length dependence
    "fig3": """
name = "fig3"
kind = "ensemble"

[lattice]
N = [10, 20, 30, 40, 50, 60]

[disorder]
sigma = [1.0]

[decoherence]
model = "bernoulli"
p = [0.1, 0.5, 0.8]
placement = ["bond_replacing", "site_attached"]

[engine]
samples = 2000
seed = 3
disorder_path = "sampled"

[output]
directory = "results/fig3"
overlay = ["rho_finite"]
""",
    # M = 5 ribbons
    "fig4": """
name = "fig4"
kind = "ensemble"

[lattice]
N = [10, 20, 30, 40]
M = [5]

[disorder]
sigma = [1.0]

[decoherence]
model = "bernoulli"
p = [0.05, 0.1, 0.3]

[engine]
samples = 200
seed = 4
disorder_path = "sampled"

[output]
directory = "results/fig4"
""",
    # conductance averaging
    "fig5": """
name = "fig5"
kind = "ensemble"

[lattice]
N = [100, 200, 400, 800, 1600]

[disorder]
sigma = [1.3]

[decoherence]
model = "bernoulli"
p = [0.5, 0.55, 0.6]

[engine]
samples = 10000
seed = 5
averaging = ["conductance_avg"]
localized_ok = true

[output]
directory = "results/fig5"
overlay = ["rho_random"]
""",
    "phase": f"""
name = "phase"
kind = "phase"

[disorder]
sigma = [{", ".join(f"{k / 10:.1f}" for k in range(0, 21))}]

[output]
directory = "results/phase"
formats = ["csv", "json"]
""",
}


def preset(name: str) -> ExperimentConfig:
    try:
        return parse_config(PRESETS[name])
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
