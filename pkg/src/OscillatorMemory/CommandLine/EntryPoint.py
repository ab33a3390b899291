# ----------------------------------------------------------------------
# |
# |  EntryPoint.py
# |
# |  David Brownell <db@DavidBrownell.com>
# |      2024-09-06 16:20:11
# |
# ----------------------------------------------------------------------
# |
# |  Copyright David Brownell 2024
# |  Distributed under the MIT License.
# |
# ----------------------------------------------------------------------
"""Memory analysis and coupling optimization for networks of open quantum harmonic oscillators."""

import datetime
import sys

from pathlib import Path
from typing import Annotated, cast, Optional

import typer

from dbrownell_Common.Streams.DoneManager import DoneManager, Flags as DoneManagerFlags  # type: ignore [import-untyped]
from typer.core import TyperGroup  # type: ignore [import-untyped]

from OscillatorMemory import __version__
from OscillatorMemory import Commands
from OscillatorMemory.CommandLine import CommandLineArguments
from OscillatorMemory.CouplingOptimizer import OptimizerMethod, OptimizerMode
from OscillatorMemory.MatKernel import GramianMethod
from OscillatorMemory.RunConfig import Overrides


# ----------------------------------------------------------------------
class NaturalOrderGrouper(TyperGroup):
    # pylint: disable=missing-class-docstring
    # ----------------------------------------------------------------------
    def list_commands(self, *args, **kwargs):  # pylint: disable=unused-argument
        return self.commands.keys()  # pragma: no cover


# ----------------------------------------------------------------------
app = typer.Typer(
    cls=NaturalOrderGrouper,
    help=__doc__,
    no_args_is_help=True,
    pretty_exceptions_show_locals=False,
    pretty_exceptions_enable=False,
)


# ----------------------------------------------------------------------
@app.command("validate", no_args_is_help=True)
def Validate(
    config_filename: Annotated[Path, CommandLineArguments.config_option],
    out_dir: Annotated[
        Optional[Path], CommandLineArguments.out_option
    ] = CommandLineArguments.out_option_default,
    no_timestamp: Annotated[
        bool, CommandLineArguments.no_timestamp_option
    ] = CommandLineArguments.no_timestamp_option_default,
    verbose: Annotated[
        bool, CommandLineArguments.verbose_option
    ] = CommandLineArguments.verbose_option_default,
    debug: Annotated[
        bool, CommandLineArguments.debug_option
    ] = CommandLineArguments.debug_option_default,
) -> None:
    """Validates the network and memory task."""

    with DoneManager.CreateCommandLine(
        flags=DoneManagerFlags.Create(verbose=verbose, debug=debug),
    ) as dm:
        dm.WriteVerbose(str(datetime.datetime.now()) + "\n\n")

        Commands.Validate(
            dm,
            config_filename,
            Overrides(out_dir=out_dir, timestamp=not no_timestamp),
        )


# ----------------------------------------------------------------------
@app.command("assemble", no_args_is_help=True)
def Assemble(
    config_filename: Annotated[Path, CommandLineArguments.config_option],
    out_dir: Annotated[
        Optional[Path], CommandLineArguments.out_option
    ] = CommandLineArguments.out_option_default,
    no_timestamp: Annotated[
        bool, CommandLineArguments.no_timestamp_option
    ] = CommandLineArguments.no_timestamp_option_default,
    verbose: Annotated[
        bool, CommandLineArguments.verbose_option
    ] = CommandLineArguments.verbose_option_default,
    debug: Annotated[
        bool, CommandLineArguments.debug_option
    ] = CommandLineArguments.debug_option_default,
) -> None:
    """Assembles the augmented model matrices of the network."""

    with DoneManager.CreateCommandLine(
        flags=DoneManagerFlags.Create(verbose=verbose, debug=debug),
    ) as dm:
        dm.WriteVerbose(str(datetime.datetime.now()) + "\n\n")

        Commands.Assemble(
            dm,
            config_filename,
            Overrides(out_dir=out_dir, timestamp=not no_timestamp),
        )


# ----------------------------------------------------------------------
@app.command("simulate", no_args_is_help=True)
def Simulate(
    config_filename: Annotated[Path, CommandLineArguments.config_option],
    out_dir: Annotated[
        Optional[Path], CommandLineArguments.out_option
    ] = CommandLineArguments.out_option_default,
    epsilon: Annotated[
        Optional[str], CommandLineArguments.epsilon_option
    ] = CommandLineArguments.epsilon_option_default,
    method: Annotated[
        Optional[GramianMethod], CommandLineArguments.method_option
    ] = CommandLineArguments.method_option_default,
    no_timestamp: Annotated[
        bool, CommandLineArguments.no_timestamp_option
    ] = CommandLineArguments.no_timestamp_option_default,
    verbose: Annotated[
        bool, CommandLineArguments.verbose_option
    ] = CommandLineArguments.verbose_option_default,
    debug: Annotated[
        bool, CommandLineArguments.debug_option
    ] = CommandLineArguments.debug_option_default,
) -> None:
    """Writes the mean-square deviation curve of the selected variables."""

    with DoneManager.CreateCommandLine(
        flags=DoneManagerFlags.Create(verbose=verbose, debug=debug),
    ) as dm:
        dm.WriteVerbose(str(datetime.datetime.now()) + "\n\n")

        Commands.Simulate(
            dm,
            config_filename,
            Overrides(
                out_dir=out_dir,
                epsilons=cast(Optional[list[float]], epsilon),
                gramian=method,
                timestamp=not no_timestamp,
            ),
        )


# ----------------------------------------------------------------------
@app.command("decoherence", no_args_is_help=True)
def Decoherence(
    config_filename: Annotated[Path, CommandLineArguments.config_option],
    out_dir: Annotated[
        Optional[Path], CommandLineArguments.out_option
    ] = CommandLineArguments.out_option_default,
    epsilon: Annotated[
        Optional[str], CommandLineArguments.epsilon_option
    ] = CommandLineArguments.epsilon_option_default,
    method: Annotated[
        Optional[GramianMethod], CommandLineArguments.method_option
    ] = CommandLineArguments.method_option_default,
    no_timestamp: Annotated[
        bool, CommandLineArguments.no_timestamp_option
    ] = CommandLineArguments.no_timestamp_option_default,
    verbose: Annotated[
        bool, CommandLineArguments.verbose_option
    ] = CommandLineArguments.verbose_option_default,
    debug: Annotated[
        bool, CommandLineArguments.debug_option
    ] = CommandLineArguments.debug_option_default,
) -> None:
    """Calculates decoherence times and their high-fidelity approximations."""

    with DoneManager.CreateCommandLine(
        flags=DoneManagerFlags.Create(verbose=verbose, debug=debug),
    ) as dm:
        dm.WriteVerbose(str(datetime.datetime.now()) + "\n\n")

        Commands.Decoherence(
            dm,
            config_filename,
            Overrides(
                out_dir=out_dir,
                epsilons=cast(Optional[list[float]], epsilon),
                gramian=method,
                timestamp=not no_timestamp,
            ),
        )


# ----------------------------------------------------------------------
@app.command("optimize", no_args_is_help=True)
def Optimize(
    config_filename: Annotated[Path, CommandLineArguments.config_option],
    out_dir: Annotated[
        Optional[Path], CommandLineArguments.out_option
    ] = CommandLineArguments.out_option_default,
    epsilon: Annotated[
        Optional[str], CommandLineArguments.epsilon_option
    ] = CommandLineArguments.epsilon_option_default,
    optimizer: Annotated[
        Optional[OptimizerMethod], CommandLineArguments.optimizer_option
    ] = CommandLineArguments.optimizer_option_default,
    mode: Annotated[
        Optional[OptimizerMode], CommandLineArguments.mode_option
    ] = CommandLineArguments.mode_option_default,
    method: Annotated[
        Optional[GramianMethod], CommandLineArguments.method_option
    ] = CommandLineArguments.method_option_default,
    no_timestamp: Annotated[
        bool, CommandLineArguments.no_timestamp_option
    ] = CommandLineArguments.no_timestamp_option_default,
    verbose: Annotated[
        bool, CommandLineArguments.verbose_option
    ] = CommandLineArguments.verbose_option_default,
    debug: Annotated[
        bool, CommandLineArguments.debug_option
    ] = CommandLineArguments.debug_option_default,
) -> None:
    """Optimizes the direct energy coupling blocks to maximize the approximate decoherence time."""

    with DoneManager.CreateCommandLine(
        flags=DoneManagerFlags.Create(verbose=verbose, debug=debug),
    ) as dm:
        dm.WriteVerbose(str(datetime.datetime.now()) + "\n\n")

        Commands.Optimize(
            dm,
            config_filename,
            Overrides(
                out_dir=out_dir,
                epsilons=cast(Optional[list[float]], epsilon),
                optimizer=optimizer,
                mode=mode,
                gramian=method,
                timestamp=not no_timestamp,
            ),
        )


# ----------------------------------------------------------------------
@app.command("isolate", no_args_is_help=True)
def Isolate(
    config_filename: Annotated[Path, CommandLineArguments.config_option],
    out_dir: Annotated[
        Optional[Path], CommandLineArguments.out_option
    ] = CommandLineArguments.out_option_default,
    epsilon: Annotated[
        Optional[str], CommandLineArguments.epsilon_option
    ] = CommandLineArguments.epsilon_option_default,
    method: Annotated[
        Optional[GramianMethod], CommandLineArguments.method_option
    ] = CommandLineArguments.method_option_default,
    no_timestamp: Annotated[
        bool, CommandLineArguments.no_timestamp_option
    ] = CommandLineArguments.no_timestamp_option_default,
    verbose: Annotated[
        bool, CommandLineArguments.verbose_option
    ] = CommandLineArguments.verbose_option_default,
    debug: Annotated[
        bool, CommandLineArguments.debug_option
    ] = CommandLineArguments.debug_option_default,
) -> None:
    """Analyzes the subnetwork that is isolated from the input fields."""

    with DoneManager.CreateCommandLine(
        flags=DoneManagerFlags.Create(verbose=verbose, debug=debug),
    ) as dm:
        dm.WriteVerbose(str(datetime.datetime.now()) + "\n\n")

        Commands.Isolate(
            dm,
            config_filename,
            Overrides(
                out_dir=out_dir,
                epsilons=cast(Optional[list[float]], epsilon),
                gramian=method,
                timestamp=not no_timestamp,
            ),
        )


# ----------------------------------------------------------------------
@app.command("version", no_args_is_help=False)
def Version():
    """Displays the current version and exits."""

    sys.stdout.write(f"OscillatorMemory v{__version__}\n")


# ----------------------------------------------------------------------
# ----------------------------------------------------------------------
# ----------------------------------------------------------------------
if __name__ == "__main__":
    app()  # pragma: no cover
