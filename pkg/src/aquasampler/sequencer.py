"""Spatial grouping and visiting order for sampling tasks.

Distances are unitless: Euclidean over the normalized per-zone floor-plan
coordinates, plus a constant penalty whenever a leg crosses zones (zones
are separate rooms, so within-zone geometry dominates). All functions are
pure and deterministic; tie-breaks are lexicographic so identical inputs
always yield identical plans.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .domain import Registry, SamplingPoint, SamplingTask


class SequencerError(Exception):
    pass


class EmptyCluster(SequencerError):
    pass


class TooLarge(SequencerError):
    pass


class KTooLarge(SequencerError):
    pass


class UnknownPoint(SequencerError):
    pass


OPTIMAL_ROUTE_LIMIT = 9


@dataclass(frozen=True)
class DistanceModel:
    """Intra-zone Euclidean metric with an additive inter-zone penalty.

    The penalized metric is symmetric and non-negative but need not satisfy
    the triangle inequality (a two-hop detour through a third zone can beat
    a direct cross-zone leg), so routing code must not assume it.
    """

    inter_zone_penalty: float = 5.0

    def __post_init__(self) -> None:
        if self.inter_zone_penalty < 0:
            raise SequencerError("inter-zone penalty must be non-negative")


def distance(a: SamplingPoint, b: SamplingPoint, model: DistanceModel) -> float:
    """Leg cost between two points; cross-zone legs pay the penalty."""
    euclid = math.hypot(a.coords[0] - b.coords[0], a.coords[1] - b.coords[1])
    if a.zone_id != b.zone_id:
        return model.inter_zone_penalty + euclid
    return euclid


@dataclass(frozen=True)
class RouteStop:
    task_id: str
    point_id: str
    leg_cost: float


@dataclass(frozen=True)
class RoutePlan:
    start_point: str
    stops: tuple[RouteStop, ...]
    total_cost: float

    @property
    def task_order(self) -> tuple[str, ...]:
        return tuple(stop.task_id for stop in self.stops)


@dataclass(frozen=True)
class ClusterAssignment:
    assignment: tuple[tuple[str, int], ...]
    k: int

    def as_dict(self) -> dict[str, int]:
        return dict(self.assignment)

    def cluster(self, index: int) -> list[str]:
        return [task_id for task_id, c in self.assignment if c == index]


def _point_of(task: SamplingTask, registry: Registry) -> SamplingPoint:
    point = registry.points.get(task.point_id)
    if point is None:
        raise UnknownPoint(task.point_id)
    return point


def _task_sort_key(task: SamplingTask) -> tuple[str, str, str]:
    return (task.point_id, task.method_id, task.task_id)


def cluster_tasks(
    tasks: Sequence[SamplingTask],
    registry: Registry,
    k: Optional[int] = None,
    model: Optional[DistanceModel] = None,
) -> ClusterAssignment:
    """Group tasks spatially.

    Without ``k``, clusters are the zones (one per distinct zone, indexed in
    sorted zone order). With ``k``, runs medoid-based clustering under the
    distance model: medoids start as the k tasks with lexicographically
    smallest point ids and the assign/update loop runs to convergence or
    100 rounds, assignment ties breaking toward the lower cluster index.
    """
    model = model or DistanceModel()
    if k is None:
        zones = sorted({_point_of(t, registry).zone_id for t in tasks})
        zone_index = {zone: i for i, zone in enumerate(zones)}
        assignment = tuple(
            (t.task_id, zone_index[_point_of(t, registry).zone_id]) for t in tasks
        )
        return ClusterAssignment(assignment, len(zones))

    if k < 1 or k > len(tasks):
        raise KTooLarge(f"k={k} outside 1..{len(tasks)}")

    ordered = sorted(tasks, key=_task_sort_key)
    points = {t.task_id: _point_of(t, registry) for t in ordered}
    ids = [t.task_id for t in ordered]
    dist = {
        (a, b): distance(points[a], points[b], model)
        for a in ids
        for b in ids
    }
    medoids = ids[:k]

    assignment_map: dict[str, int] = {}
    for _ in range(100):
        for task_id in ids:
            best_index = min(
                range(k), key=lambda c: (dist[(task_id, medoids[c])], c)
            )
            assignment_map[task_id] = best_index
        next_medoids = []
        for c in range(k):
            members = [task_id for task_id in ids if assignment_map[task_id] == c]
            if not members:
                next_medoids.append(medoids[c])
                continue
            best = min(members, key=lambda m: (sum(dist[(m, other)] for other in members), m))
            next_medoids.append(best)
        if next_medoids == medoids:
            break
        medoids = next_medoids

    by_input_order = tuple((t.task_id, assignment_map[t.task_id]) for t in tasks)
    return ClusterAssignment(by_input_order, k)


def clustering_cost(
    assignment: ClusterAssignment,
    tasks: Sequence[SamplingTask],
    registry: Registry,
    model: Optional[DistanceModel] = None,
) -> float:
    """Objective value: per cluster, the best-medoid total distance to members."""
    model = model or DistanceModel()
    by_id = {t.task_id: t for t in tasks}
    total = 0.0
    for c in range(assignment.k):
        members = assignment.cluster(c)
        if not members:
            continue
        points = [_point_of(by_id[m], registry) for m in members]
        total += min(
            sum(distance(candidate, p, model) for p in points) for candidate in points
        )
    return total


def _build_plan(
    order: Sequence[SamplingTask],
    start: SamplingPoint,
    registry: Registry,
    model: DistanceModel,
) -> RoutePlan:
    stops = []
    total = 0.0
    previous = start
    for task in order:
        point = _point_of(task, registry)
        leg = distance(previous, point, model)
        total += leg
        stops.append(RouteStop(task.task_id, task.point_id, leg))
        previous = point
    return RoutePlan(start.point_id, tuple(stops), total)


def greedy_route(
    tasks: Sequence[SamplingTask],
    start_point: str,
    registry: Registry,
    model: Optional[DistanceModel] = None,
) -> RoutePlan:
    """Nearest-neighbor construction from the start point.

    Ties break by lexicographic point id, then method id, so the order is
    deterministic.
    """
    model = model or DistanceModel()
    if not tasks:
        raise EmptyCluster("no tasks to sequence")
    start = registry.points.get(start_point)
    if start is None:
        raise UnknownPoint(start_point)

    remaining = sorted(tasks, key=_task_sort_key)
    points = {t.task_id: _point_of(t, registry) for t in remaining}
    order: list[SamplingTask] = []
    current = start
    while remaining:
        best = min(
            remaining,
            key=lambda t: (distance(current, points[t.task_id], model),) + _task_sort_key(t),
        )
        remaining.remove(best)
        order.append(best)
        current = points[best.task_id]
    return _build_plan(order, start, registry, model)


def sequence_route(
    tasks: Sequence[SamplingTask],
    start_point: str,
    registry: Registry,
    model: Optional[DistanceModel] = None,
) -> RoutePlan:
    """Greedy nearest-neighbor order improved by 2-opt.

    The result visits every task exactly once; its cost never exceeds the
    greedy starting tour's.
    """
    model = model or DistanceModel()
    greedy = greedy_route(tasks, start_point, registry, model)
    start = registry.points[start_point]
    by_id = {t.task_id: t for t in tasks}
    order = [by_id[task_id] for task_id in greedy.task_order]
    points = {t.task_id: _point_of(t, registry) for t in order}
    order = _two_opt(order, start, points, model)
    return _build_plan(order, start, registry, model)


def _two_opt(
    order: list[SamplingTask],
    start: SamplingPoint,
    points: dict[str, SamplingPoint],
    model: DistanceModel,
) -> list[SamplingTask]:
    """First-improvement 2-opt on the open path rooted at the start point."""
    if len(order) < 2:
        return order

    def coords(index: int) -> SamplingPoint:
        return start if index < 0 else points[order[index].task_id]

    n = len(order)
    improved = True
    while improved:
        improved = False
        for i in range(n - 1):
            for j in range(i + 1, n):
                # Reversing order[i..j] swaps the edges entering i and leaving j.
                before = distance(coords(i - 1), coords(i), model)
                after = distance(coords(i - 1), coords(j), model)
                if j + 1 < n:
                    before += distance(coords(j), coords(j + 1), model)
                    after += distance(coords(i), coords(j + 1), model)
                if after < before - 1e-12:
                    order[i : j + 1] = reversed(order[i : j + 1])
                    improved = True
    return order


def optimal_route(
    tasks: Sequence[SamplingTask],
    start_point: str,
    registry: Registry,
    model: Optional[DistanceModel] = None,
) -> RoutePlan:
    """Exhaustive minimum over all visiting orders (test oracle, small inputs).

    Among cost-minimal orders the lexicographically smallest visiting
    sequence wins, so the result is deterministic.
    """
    model = model or DistanceModel()
    if not tasks:
        raise EmptyCluster("no tasks to sequence")
    if len(tasks) > OPTIMAL_ROUTE_LIMIT:
        raise TooLarge(f"{len(tasks)} tasks exceeds the {OPTIMAL_ROUTE_LIMIT}-task oracle limit")
    start = registry.points.get(start_point)
    if start is None:
        raise UnknownPoint(start_point)

    ordered = sorted(tasks, key=_task_sort_key)
    coords = [_point_of(t, registry) for t in ordered]
    n = len(ordered)
    start_leg = [distance(start, p, model) for p in coords]
    leg = [[distance(a, b, model) for b in coords] for a in coords]

    best_cost = math.inf
    best_perm: Optional[tuple[int, ...]] = None
    for perm in itertools.permutations(range(n)):
        cost = start_leg[perm[0]]
        for a, b in zip(perm, perm[1:]):
            cost += leg[a][b]
            if cost >= best_cost:
                break
        if cost < best_cost:
            best_cost = cost
            best_perm = perm
    assert best_perm is not None
    return _build_plan([ordered[i] for i in best_perm], start, registry, model)


def route_cost(plan: RoutePlan, registry: Registry, model: Optional[DistanceModel] = None) -> float:
    """Recompute a plan's cost from the registry coordinates."""
    model = model or DistanceModel()
    previous = registry.points.get(plan.start_point)
    if previous is None:
        raise UnknownPoint(plan.start_point)
    total = 0.0
    for stop in plan.stops:
        point = registry.points.get(stop.point_id)
        if point is None:
            raise UnknownPoint(stop.point_id)
        total += distance(previous, point, model)
        previous = point
    return total
