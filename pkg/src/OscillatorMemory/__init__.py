# ----------------------------------------------------------------------
# |
# |  Copyright (c) 2024 David Brownell
# |  Distributed under the MIT License.
# |
# ----------------------------------------------------------------------
"""Memory analysis and coupling optimization for networks of open quantum harmonic oscillators."""

# pylint: disable=invalid-name

# Overwritten by `python ../../Build.py update_version` during CI; this default is used until then.
__version__ = "0.1.0"
