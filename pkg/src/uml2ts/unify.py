"""Merge the per-diagram transition systems into one unified TS.

The sequence diagram leads.  From a unified configuration the SD takes each
of its gvs-consistent transitions in turn; the state machine and activity
diagram then follow, in that order, against the valuation the SD step left
behind:

* a follower with consistent transitions advances, one successor per choice
  (a follower may fix a guard that is still ``dc``);
* a follower without any outgoing transition holds its label;
* a follower whose transitions all contradict the valuation holds its
  position but shows ``-`` until a later step is consistent again.

When the SD cannot move, it keeps its last label and the followers may only
take transitions that leave the valuation unchanged.

Exploration runs over full configurations (component positions plus
valuation); the resulting graph is quotiented by (rendered name, valuation),
which is exactly the state space the emitted SMV model can distinguish.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from typing import Optional

from .build import ad_to_ts, sd_to_ts, smd_to_ts
from .model import DiagramBundle, collect_guards, validate
from .ts import (
    MISSING, ComponentTS, GuardValuation, UnifiedState, UnifiedTS,
    gvs_consistent, gvs_overwrite,
)


class BundleInvalid(ValueError):
    def __init__(self, report):
        self.report = report
        super().__init__("invalid bundle:\n" + str(report))


@dataclass(frozen=True)
class Config:
    sd: int
    smd: Optional[int]
    smd_lost: bool
    ad: Optional[int]
    ad_lost: bool
    gvs: GuardValuation


def _follow(cts, pos, lost, gvs, leader_moved):
    """Options (pos, lost, gvs, moved) for one follower."""
    if cts is None:
        return [(None, False, gvs, False)]
    out = cts.outgoing(pos)
    if not out:
        return [(pos, False, gvs, False)]
    ok = [t for t in out if gvs_consistent(gvs, t.updates, t.reassign)]
    if not leader_moved:
        ok = [t for t in ok if gvs_overwrite(gvs, t.updates) == gvs]
        if not ok:
            return [(pos, lost, gvs, False)]
    if not ok:
        return [(pos, True, gvs, False)]
    return [(t.target, False, gvs_overwrite(gvs, t.updates), True) for t in ok]


def successors(cfg: Config, sd_ts, smd_ts=None, ad_ts=None) -> list:
    """Successor configurations of ``cfg``, sorted by target labels."""
    out = []
    sd_moves = [t for t in sd_ts.outgoing(cfg.sd)
                if gvs_consistent(cfg.gvs, t.updates, t.reassign)]
    leads = [(t.target, gvs_overwrite(cfg.gvs, t.updates)) for t in sd_moves]
    leader_moved = bool(leads)
    if not leads:
        leads = [(cfg.sd, cfg.gvs)]
    for sd_pos, g1 in leads:
        for smd_pos, smd_lost, g2, m1 in _follow(smd_ts, cfg.smd, cfg.smd_lost, g1, leader_moved):
            for ad_pos, ad_lost, g3, m2 in _follow(ad_ts, cfg.ad, cfg.ad_lost, g2, leader_moved):
                if leader_moved or m1 or m2:
                    out.append(Config(sd_pos, smd_pos, smd_lost, ad_pos, ad_lost, g3))
    out.sort(key=lambda c: _sort_key(c, sd_ts, smd_ts, ad_ts))
    return out


def _slot(cts, pos, lost):
    if cts is None or lost:
        return MISSING
    return cts.states[pos].label


def unified_state(cfg: Config, sd_ts, smd_ts=None, ad_ts=None) -> UnifiedState:
    return UnifiedState(sd_ts.states[cfg.sd].label, _slot(smd_ts, cfg.smd, cfg.smd_lost),
                        _slot(ad_ts, cfg.ad, cfg.ad_lost), cfg.gvs)


def _sort_key(c, sd_ts, smd_ts, ad_ts):
    return (sd_ts.states[c.sd].label.render(),
            _slot(smd_ts, c.smd, c.smd_lost).render(),
            _slot(ad_ts, c.ad, c.ad_lost).render(),
            tuple(v.value for v in c.gvs.values),
            c.sd, c.smd if c.smd is not None else -1, c.ad if c.ad is not None else -1)


def unify(sd_ts: ComponentTS, smd_ts: Optional[ComponentTS] = None,
          ad_ts: Optional[ComponentTS] = None, guards=None) -> UnifiedTS:
    """Breadth-first product of the component TSs."""
    if smd_ts is None and ad_ts is None:
        raise ValueError("unify needs a state machine or an activity TS besides the SD")
    guards = tuple(sd_ts.guards if guards is None else guards)
    for cts in (sd_ts, smd_ts, ad_ts):
        if cts is not None and tuple(cts.guards) != guards:
            raise ValueError(f"{cts.kind} TS built over a different guard list")
    start = Config(sd_ts.initial,
                   smd_ts.initial if smd_ts else None, False,
                   ad_ts.initial if ad_ts else None, False,
                   GuardValuation.all_dc(guards))
    states, node_of_key = [], {}
    seen = set()
    edges, edge_set = [], set()

    def node(cfg):
        us = unified_state(cfg, sd_ts, smd_ts, ad_ts)
        if us.key not in node_of_key:
            node_of_key[us.key] = len(states)
            states.append(us)
        return node_of_key[us.key]

    queue = deque([start])
    seen.add(start)
    node(start)
    while queue:
        cfg = queue.popleft()
        src = node(cfg)
        for nxt in successors(cfg, sd_ts, smd_ts, ad_ts):
            dst = node(nxt)
            if (src, dst) not in edge_set:
                edge_set.add((src, dst))
                edges.append((src, dst))
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return UnifiedTS(guards, states, edges, 0)


def build_components(bundle: DiagramBundle, guards=None):
    guards = collect_guards(bundle) if guards is None else list(guards)
    sd_ts = sd_to_ts(bundle.sd, guards)
    smd_ts = smd_to_ts(bundle.smd, guards) if bundle.smd is not None else None
    ad_ts = ad_to_ts(bundle.ad, guards) if bundle.ad is not None else None
    return sd_ts, smd_ts, ad_ts


def unify_bundle(bundle: DiagramBundle) -> UnifiedTS:
    """Validate ``bundle``, build its component TSs and unify them."""
    report = validate(bundle)
    if report:
        raise BundleInvalid(report)
    guards = collect_guards(bundle)
    return unify(*build_components(bundle, guards), guards=guards)


def reachable_stats(uts: UnifiedTS):
    """``(declared, reachable)``: name x valuation grid size and BFS-reachable states."""
    declared = len(uts.names()) * 3 ** len(uts.guards)
    seen = {uts.initial}
    queue = deque([uts.initial])
    while queue:
        for t in uts.successors(queue.popleft()):
            if t not in seen:
                seen.add(t)
                queue.append(t)
    return declared, len(seen)
