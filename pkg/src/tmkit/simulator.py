"""Deterministic discrete-event engine over a compiled :class:`DynamicModel`.

Time is integer ticks. Pending work sits in one priority queue keyed by
``(tick, phase, instance, event name)`` so a run is a pure function of the
model and the scenario. Completions (phase 0) are handled before starts
(phase 1) within a tick.

Each (instance, region) pair is either actualized by one occurrence or
potentialized. A negative occurrence potentializes its region for the rest
of the instance and is recorded with zero extent.
"""

from __future__ import annotations

import heapq
import itertools
import json
import logging
import random
from collections import Counter, deque
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Iterator, Optional, Union

from .dynamics import DynamicModel, natural_key
from .errors import ScenarioError, TickBudgetExceeded, UnresolvedGuard
from .model import Region

log = logging.getLogger(__name__)

DEFAULT_TICK_BUDGET = 10**6
_COMPLETE, _START = 0, 1

GuardSpec = dict[str, Any]


@dataclass
class Scenario:
    """Instance arrivals plus per-instance guard assignments.

    ``guards`` is one mapping shared by every instance or a list with one
    mapping per arrival. Values are booleans, probabilities in ``[0, 1]``,
    or, for a choice group name, the chosen option (string) or a mapping
    of option weights.
    """

    arrivals: list[int] = field(default_factory=list)
    guards: Union[GuardSpec, list[GuardSpec]] = field(default_factory=dict)
    seed: int = 0

    @classmethod
    def from_dict(cls, data: dict) -> "Scenario":
        if not isinstance(data, dict):
            raise ScenarioError("scenario must be a JSON object")
        arrivals = data.get("arrivals", [0])
        if not isinstance(arrivals, list) or not all(
            isinstance(t, int) and not isinstance(t, bool) and t >= 0 for t in arrivals
        ):
            raise ScenarioError("arrivals must be a list of non-negative integer ticks")
        guards = data.get("guards", {})
        if isinstance(guards, list):
            if not all(isinstance(g, dict) for g in guards):
                raise ScenarioError("per-instance guards must be objects")
        elif not isinstance(guards, dict):
            raise ScenarioError("guards must be an object or a list of objects")
        seed = data.get("seed", 0)
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise ScenarioError("seed must be an integer")
        return cls(list(arrivals), guards, seed)

    @classmethod
    def load(cls, path: Union[str, Path]) -> "Scenario":
        with open(path, encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ScenarioError(f"{path}: {exc}") from None
        return cls.from_dict(data)


@dataclass
class Occurrence:
    instance: int
    name: str
    start: int
    end: Optional[int]  # None while an extended occurrence is still open
    negative: bool = False
    region: Optional[Region] = field(default=None, compare=False, repr=False)
    extended: bool = field(default=False, compare=False, repr=False)

    @property
    def atemporal(self) -> bool:
        return self.negative

    def sort_key(self) -> tuple:
        return (self.start, self.instance, natural_key(self.name))

    def to_json(self) -> str:
        return json.dumps(
            {"instance": self.instance, "name": self.name, "start": self.start,
             "end": self.end, "negative": self.negative}
        )


@dataclass
class Trace:
    occurrences: list[Occurrence] = field(default_factory=list)

    def __iter__(self) -> Iterator[Occurrence]:
        return iter(self.occurrences)

    def __len__(self) -> int:
        return len(self.occurrences)

    def positives(self) -> list[Occurrence]:
        return [o for o in self.occurrences if not o.negative]

    def negatives(self) -> list[Occurrence]:
        return [o for o in self.occurrences if o.negative]

    def project(self, instance: int) -> list[Occurrence]:
        return [o for o in self.occurrences if o.instance == instance]

    def names(self, instance: Optional[int] = None, negative: Optional[bool] = None) -> list[str]:
        return [
            o.name for o in self.occurrences
            if (instance is None or o.instance == instance) and (negative is None or o.negative == negative)
        ]

    def to_jsonl(self) -> str:
        return "".join(o.to_json() + "\n" for o in self.occurrences)


@dataclass
class RegionCounts:
    active: int = 0
    activations: int = 0
    negatives: int = 0


@dataclass
class RegionStats:
    """Per event-region counters, keyed by event name."""

    regions: dict[str, RegionCounts] = field(default_factory=dict)

    def __getitem__(self, name: str) -> RegionCounts:
        return self.regions[name]

    def as_dict(self) -> dict[str, dict[str, int]]:
        return {
            name: {"active": c.active, "activations": c.activations, "negatives": c.negatives}
            for name, c in self.regions.items()
        }


def resolve_guards(dynamic: DynamicModel, scenario: Scenario) -> list[dict[str, bool]]:
    """Turn the scenario's guard spec into one boolean map per instance."""
    needed = dynamic.chronology.guards()
    groups = {c.name: c for c in dynamic.choices}
    n = len(scenario.arrivals)
    if isinstance(scenario.guards, list):
        if len(scenario.guards) != n:
            raise ScenarioError(f"{len(scenario.guards)} guard maps for {n} arrivals")
        specs = scenario.guards
    else:
        specs = [scenario.guards] * n
    rng = random.Random(scenario.seed)
    resolved = []
    for index, spec in enumerate(specs):
        values: dict[str, bool] = {}

        def assign(key: str, value: bool) -> None:
            if values.get(key, value) != value:
                raise ScenarioError(f"instance {index}: conflicting values for guard {key!r}")
            values[key] = value

        for key in sorted(spec):
            val = spec[key]
            if key in groups:
                options = groups[key].options
                if isinstance(val, str):
                    if val not in options:
                        raise ScenarioError(f"{val!r} is not an option of choice {key!r}")
                    pick = val
                elif isinstance(val, dict):
                    weights = [val.get(o, 0) for o in options]
                    if not all(isinstance(w, (int, float)) and not isinstance(w, bool) and w >= 0 for w in weights) or sum(weights) <= 0:
                        raise ScenarioError(f"bad weights for choice {key!r}")
                    pick = rng.choices(options, weights=weights)[0]
                else:
                    raise ScenarioError(f"choice {key!r} needs an option name or weights")
                for opt in options:
                    assign(opt, opt == pick)
            elif isinstance(val, bool):
                assign(key, val)
            elif isinstance(val, (int, float)) and 0 <= val <= 1:
                assign(key, rng.random() < val)
            else:
                raise ScenarioError(f"guard {key!r}: expected boolean or probability, got {val!r}")

        for choice in dynamic.choices:
            trues = [o for o in choice.options if values.get(o) is True]
            unset = [o for o in choice.options if o not in values]
            if len(trues) > 1:
                raise ScenarioError(f"instance {index}: choice {choice.name!r} has several true options {trues}")
            if trues:
                for opt in unset:
                    values[opt] = False
            elif len(unset) == 1:
                values[unset[0]] = True
            elif not unset:
                raise ScenarioError(f"instance {index}: every option of choice {choice.name!r} is false")
        missing = needed - values.keys()
        if missing:
            raise UnresolvedGuard(missing, instance=index)
        resolved.append(values)
    return resolved


@dataclass
class _Instance:
    id: int
    arrival: int
    guards: dict[str, bool]
    pending: int = 0
    active: dict[Region, Occurrence] = field(default_factory=dict)
    dead: set = field(default_factory=set)
    completions: Counter = field(default_factory=Counter)
    join_fired: Counter = field(default_factory=Counter)
    cancelled: set = field(default_factory=set)
    last_negative: Optional[int] = None
    finished: bool = False
    end: Optional[int] = None


class SimState:
    def __init__(self, dynamic: DynamicModel, scenario: Scenario, max_ticks: int = DEFAULT_TICK_BUDGET):
        self.dynamic = dynamic
        self.scenario = scenario
        self.max_ticks = max_ticks
        self.clock = 0
        guards = resolve_guards(dynamic, scenario)
        chron = dynamic.chronology
        self._out = {name: chron.out_edges(name) for name in chron.nodes}
        self._joins_by_input: dict[str, list[int]] = {}
        for index, join in enumerate(chron.joins):
            for inp in join.inputs:
                self._joins_by_input.setdefault(inp.name, []).append(index)
        self._queue: list[tuple] = []
        self._seq = itertools.count()
        self._occurrences: list[Occurrence] = []
        self._ready: deque[Occurrence] = deque()
        self._counts = {name: RegionCounts() for name in dynamic.events}
        self.instances = [_Instance(i, t, g) for i, (t, g) in enumerate(zip(scenario.arrivals, guards))]
        roots = chron.roots()
        for inst in self.instances:
            for name in roots:
                self._push(inst.arrival, _START, inst, name)
            if inst.pending == 0:
                inst.finished, inst.end = True, inst.arrival

    def _push(self, tick: int, phase: int, inst: _Instance, name: str, occ: Optional[Occurrence] = None) -> None:
        heapq.heappush(self._queue, (tick, phase, inst.id, natural_key(name), next(self._seq), name, occ))
        inst.pending += 1

    @property
    def quiescent(self) -> bool:
        return not self._queue and not self._ready

    def _advance(self) -> None:
        tick, phase, iid, _, _, name, occ = heapq.heappop(self._queue)
        if tick > self.max_ticks:
            raise TickBudgetExceeded(f"simulation passed the tick budget of {self.max_ticks}")
        self.clock = tick
        inst = self.instances[iid]
        inst.pending -= 1
        if phase == _COMPLETE:
            self._complete(inst, occ, tick)
        else:
            self._start(inst, name, tick)
        if inst.pending == 0 and not inst.finished:
            self._finish(inst, tick)

    def _start(self, inst: _Instance, name: str, tick: int) -> None:
        event = self.dynamic.events[name]
        region = event.region
        if region in inst.dead:
            log.debug("instance %d: %s stays potentialized", inst.id, name)
            return
        current = inst.active.get(region)
        if current is not None:
            if current.end is None:
                if inst.last_negative is None or inst.last_negative < current.start:
                    log.debug("instance %d: %s already actualized", inst.id, name)
                    return
                self._close(inst, current, tick)
            else:
                self._push(current.end, _START, inst, name)
                return
        occ = Occurrence(
            inst.id, name, tick, None if event.extended else tick + event.duration,
            region=region, extended=event.extended,
        )
        inst.active[region] = occ
        self._occurrences.append(occ)
        self._ready.append(occ)
        self._counts[name].activations += 1
        self._push(tick + event.duration, _COMPLETE, inst, name, occ)

    def _complete(self, inst: _Instance, occ: Occurrence, tick: int) -> None:
        if id(occ) in inst.cancelled:
            return
        if not occ.extended and inst.active.get(occ.region) is occ:
            del inst.active[occ.region]
        name = occ.name
        inst.completions[name] += 1
        for edge in self._out[name]:
            if edge.guard is not None and not inst.guards[edge.guard]:
                continue
            if edge.dst in self.dynamic.negatives:
                self._negate(inst, edge.dst, tick)
            else:
                self._push(tick, _START, inst, edge.dst)
        for index in self._joins_by_input.get(name, ()):
            join = self.dynamic.chronology.joins[index]
            if join.guard is not None and not inst.guards[join.guard]:
                continue
            required = [i.name for i in join.inputs if i.guard is None or inst.guards[i.guard]]
            if name not in required:
                continue
            if all(inst.completions[r] > inst.join_fired[index] for r in required):
                inst.join_fired[index] += 1
                self._push(tick, _START, inst, join.output)

    def _negate(self, inst: _Instance, name: str, tick: int) -> None:
        negative = self.dynamic.negatives[name]
        region = negative.region
        current = inst.active.get(region)
        if current is not None:
            self._close(inst, current, tick)
        inst.dead.add(region)
        inst.last_negative = tick
        occ = Occurrence(inst.id, name, tick, tick, True, region=region)
        self._occurrences.append(occ)
        self._ready.append(occ)
        self._counts[negative.paired].negatives += 1

    def _close(self, inst: _Instance, occ: Occurrence, tick: int) -> None:
        occ.end = tick
        inst.active.pop(occ.region, None)
        inst.cancelled.add(id(occ))

    def _finish(self, inst: _Instance, tick: int) -> None:
        for occ in inst.active.values():
            if occ.end is None:
                occ.end = tick
        inst.active.clear()
        inst.finished, inst.end = True, tick

    # public surface

    def step(self) -> Optional[Occurrence]:
        """Advance to the next occurrence; ``None`` once the state is quiescent."""
        while not self._ready:
            if not self._queue:
                return None
            self._advance()
        return self._ready.popleft()

    def run(self, until: Optional[int] = None) -> Trace:
        while self._queue:
            if until is not None and self._queue[0][0] > until:
                break
            self._advance()
        self._ready.clear()
        return self.trace()

    def trace(self) -> Trace:
        snapshot = [
            replace(o, end=o.end if o.end is not None else max(self.clock, o.start))
            for o in self._occurrences
        ]
        snapshot.sort(key=Occurrence.sort_key)
        return Trace(snapshot)

    def stats(self) -> RegionStats:
        counts = {name: replace(c, active=0) for name, c in self._counts.items()}
        for inst in self.instances:
            for occ in inst.active.values():
                counts[occ.name].active += 1
        return RegionStats(counts)


def init(dynamic: DynamicModel, scenario: Scenario, max_ticks: int = DEFAULT_TICK_BUDGET) -> SimState:
    return SimState(dynamic, scenario, max_ticks)


def step(state: SimState) -> Optional[Occurrence]:
    return state.step()


def run(state: SimState, until: Optional[int] = None) -> Trace:
    return state.run(until)


def stats(state: SimState) -> RegionStats:
    return state.stats()


def simulate(dynamic: DynamicModel, scenario: Scenario, until: Optional[int] = None,
             max_ticks: int = DEFAULT_TICK_BUDGET) -> Trace:
    return init(dynamic, scenario, max_ticks).run(until)
