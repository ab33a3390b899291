# ----------------------------------------------------------------------
# |
# |  CommandLineArguments.py
# |
# |  David Brownell <db@DavidBrownell.com>
# |      2024-09-06 16:02:48
# |
# ----------------------------------------------------------------------
# |
# |  Copyright David Brownell 2024
# |  Distributed under the MIT License.
# |
# ----------------------------------------------------------------------

import math

from typing import Optional

import typer


# ----------------------------------------------------------------------
def ToEpsilons(
    value: Optional[str],
) -> Optional[list[float]]:
    if value is None:
        return None

    epsilons: list[float] = []

    for item in value.split(","):
        item = item.strip()

        try:
            eps = float(item)
        except ValueError:
            raise typer.BadParameter(f"'{item}' is not a number.")

        if not math.isfinite(eps) or eps <= 0.0:
            raise typer.BadParameter(f"Fidelity levels must be positive ({item}).")

        epsilons.append(eps)

    return epsilons


# ----------------------------------------------------------------------
config_option = typer.Option(
    "--config",
    dir_okay=False,
    resolve_path=True,
    help="JSON document that describes the network, the memory task, and the solver options.",
)

out_option = typer.Option(
    "--out",
    file_okay=False,
    resolve_path=True,
    help="Directory where output files are written; overrides 'output.dir' in the configuration.",
)
out_option_default = None

epsilon_option = typer.Option(
    "--epsilon",
    callback=ToEpsilons,
    help="Comma-separated fidelity levels that override 'task.epsilons' in the configuration.",
)
epsilon_option_default = None

method_option = typer.Option(
    "--method",
    case_sensitive=False,
    help="Algorithm used to compute Gramians; overrides 'solver.gramian' in the configuration.",
)
method_option_default = None

optimizer_option = typer.Option(
    "--optimizer",
    case_sensitive=False,
    help="Algorithm used to solve the optimality system; overrides 'solver.optimizer' in the configuration.",
)
optimizer_option_default = None

mode_option = typer.Option(
    "--mode",
    case_sensitive=False,
    help="Objective minimized by the optimizer; overrides 'solver.mode' in the configuration.",
)
mode_option_default = None

no_timestamp_option = typer.Option(
    "--no-timestamp",
    help="Do not write the generation time to output files.",
)
no_timestamp_option_default = False

verbose_option = typer.Option("--verbose", help="Write verbose information to the terminal.")
verbose_option_default = False

debug_option = typer.Option("--debug", help="Write debug information to the terminal.")
debug_option_default = False
