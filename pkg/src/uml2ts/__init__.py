"""Unify UML sequence, state machine and activity diagrams into one
transition system, emit NuSMV models and check CTL properties."""

__version__ = "0.1.0"

from .model import (ActivityDiagram, DiagramBundle, SequenceDiagram,
                    StateMachineDiagram, ValidationReport, validate)
from .ubd import BundleError, ParseError, load_bundle, parse_diagram, read_diagram, serialize_diagram
from .ts import ComponentTS, GuardValuation, GuardValue, UnifiedState, UnifiedTS, load_unified_dump
from .build import ad_to_ts, sd_to_ts, smd_to_ts
from .unify import BundleInvalid, reachable_stats, unify, unify_bundle
from .ctl import CTLSyntaxError, Formula, parse_ctl, render_ctl
from .patterns import PatternSpec, instantiate_pattern
from .checker import Checker, Trace, Verdict, check, counterexample, validate_trace
from .smv import EmitError, EmitOptions, check_smv_syntax, emit_property, emit_smv

from importlib import resources as _resources


def fixture_path(name: str):
    """Path of a bundled example file, e.g. ``fixture_path("atm_sd.ubd")``."""
    return _resources.files(__name__).joinpath("fixtures", name)


ATM_FILES = ("atm_sd.ubd", "atm_smd.ubd", "atm_ad.ubd")
