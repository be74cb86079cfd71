"""Resilience quantification: performance timeline, eight-point curve, loss.

The performance index is the served fraction of total demand per slot,
normalized to [0, 1] (defined as 1 when nothing is demanded). The
eight-point curve is a piecewise-linear summary with geometric anchors for
degradation start (t_d), the minimum (t_m, P_min), the minimum plateau, and
restoration.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import EmptyTimeline, NegativePower

CURVE_LABELS = (
    "normal",
    "event_start",
    "preventive_end",
    "minimum_reached",
    "restoration_start",
    "partial_recovery",
    "full_restoration",
    "observation_end",
)

RESTORATION_TOL = 1e-6


@dataclass(frozen=True)
class PerformanceSample:
    t: int
    served: float  # kW
    demanded: float  # kW

    @property
    def index(self) -> float:
        return 1.0 if self.demanded == 0 else self.served / self.demanded


@dataclass(frozen=True)
class CurvePoint:
    label: str
    t: float
    value: float


@dataclass(frozen=True)
class EightPointCurve:
    points: tuple[CurvePoint, ...]
    t_d: float
    t_m: float
    p_min: float

    def interpolate(self, t: float) -> float:
        """Value of the piecewise-linear reconstruction at time t."""
        pts = self.points
        if t <= pts[0].t:
            return pts[0].value
        for a, b in zip(pts, pts[1:]):
            if a.t <= t <= b.t:
                if b.t == a.t:
                    continue
                frac = (t - a.t) / (b.t - a.t)
                return a.value + frac * (b.value - a.value)
        return pts[-1].value


@dataclass(frozen=True)
class ResilienceReport:
    loss_area: float  # index-hours
    unserved_energy: float  # kWh
    monetary_loss: float  # $
    p_min: float
    time_below_threshold: float  # hours spent below the pre-event index


def build_timeline(
    served_by_slot: list[dict[int, float]],
    demanded_by_slot: list[dict[int, float]],
) -> list[PerformanceSample]:
    """Aggregate per-region served/demanded power into one sample per slot."""
    if len(served_by_slot) != len(demanded_by_slot):
        raise ValueError("served and demanded must cover the same slots")
    out = []
    for t, (served, demanded) in enumerate(zip(served_by_slot, demanded_by_slot), start=1):
        for rid, s in served.items():
            d = demanded.get(rid, 0.0)
            if s < 0 or d < 0:
                raise NegativePower(f"slot {t}, region {rid}: negative power")
            if s > d + 1e-9:
                raise NegativePower(
                    f"slot {t}, region {rid}: served {s} exceeds demanded {d}"
                )
        out.append(
            PerformanceSample(
                t=t,
                served=sum(served.values()),
                demanded=sum(demanded.values()),
            )
        )
    return out


def eight_point_approx(timeline: list[PerformanceSample]) -> EightPointCurve:
    """Eight-breakpoint piecewise-linear summary of the timeline.

    Anchors: first sample; last pre-event-level sample before the decline;
    end of any intermediate (preventive) plateau before the minimum; first
    and last samples at the global minimum; recovery-ramp midpoint; first
    post-minimum return to the pre-event level; last sample. A timeline
    with no dip collapses the interior anchors onto the flat line.
    """
    if not timeline:
        raise EmptyTimeline("timeline has no samples")
    ts = [s.t for s in timeline]
    vals = [s.index for s in timeline]
    n = len(vals)
    p_pre = vals[0]
    p_min = min(vals)
    i_min_first = vals.index(p_min)

    if p_min >= p_pre - RESTORATION_TOL:
        # no dip: everything sits on the flat line
        pts = [CurvePoint(lab, ts[0], p_pre) for lab in CURVE_LABELS[:-1]]
        pts.append(CurvePoint("observation_end", ts[-1], vals[-1]))
        return EightPointCurve(tuple(pts), t_d=ts[0], t_m=ts[0], p_min=p_min)

    i_min_last = n - 1 - vals[::-1].index(p_min)

    # last sample still at the pre-event level before the first decline
    i_decline = next(i for i in range(n) if vals[i] < p_pre - RESTORATION_TOL)
    i_event = max(0, i_decline - 1)

    # intermediate plateau strictly between the pre-event level and the minimum
    i_prev_end = i_event
    run_start = None
    for i in range(i_decline, i_min_first):
        level = vals[i]
        if p_min + RESTORATION_TOL < level < p_pre - RESTORATION_TOL:
            if run_start is not None and abs(vals[run_start] - level) <= RESTORATION_TOL:
                i_prev_end = i
            else:
                run_start = i
        else:
            run_start = None

    # first post-minimum recovery to the pre-event level
    i_full = None
    for i in range(i_min_last + 1, n):
        if vals[i] >= p_pre - RESTORATION_TOL:
            i_full = i
            break
    if i_full is None:
        i_full = n - 1

    t_partial = 0.5 * (ts[i_min_last] + ts[i_full])
    i_partial = min(range(i_min_last, i_full + 1), key=lambda i: abs(ts[i] - t_partial))

    idxs = [0, i_event, i_prev_end, i_min_first, i_min_last, i_partial, i_full, n - 1]
    pts = tuple(
        CurvePoint(lab, ts[i], vals[i]) for lab, i in zip(CURVE_LABELS, idxs)
    )
    return EightPointCurve(pts, t_d=ts[i_event], t_m=ts[i_min_first], p_min=p_min)


def _as_samples(curve_or_timeline) -> list[tuple[float, float]]:
    if isinstance(curve_or_timeline, EightPointCurve):
        return [(p.t, p.value) for p in curve_or_timeline.points]
    return [(s.t, s.index) for s in curve_or_timeline]


def resilience_loss(curve_or_timeline) -> float:
    """Area between the pre-event level and the curve (index-hours).

    Integrates the positive part of (P_pre - P(t)) under linear
    interpolation between samples; segments crossing the pre-event level
    are split analytically.
    """
    samples = _as_samples(curve_or_timeline)
    if not samples:
        raise EmptyTimeline("timeline has no samples")
    p_pre = samples[0][1]
    area = 0.0
    for (t0, v0), (t1, v1) in zip(samples, samples[1:]):
        if t1 <= t0:
            continue
        d0 = p_pre - v0
        d1 = p_pre - v1
        if d0 <= 0.0 and d1 <= 0.0:
            continue
        if d0 >= 0.0 and d1 >= 0.0:
            area += 0.5 * (d0 + d1) * (t1 - t0)
        else:
            # one endpoint above, one below: integrate the triangle piece
            tc = t0 + (t1 - t0) * d0 / (d0 - d1)
            if d0 > 0.0:
                area += 0.5 * d0 * (tc - t0)
            else:
                area += 0.5 * d1 * (t1 - tc)
    return area


def monetary_loss(
    timeline: list[PerformanceSample],
    voll: float,
    dt: float = 1.0,
) -> float:
    """Unserved energy priced at the Value of Lost Load: sum of
    (demanded - served) * dt * VoLL over all slots."""
    if voll < 0:
        raise ValueError("VoLL must be >= 0")
    return sum(max(0.0, s.demanded - s.served) for s in timeline) * dt * voll


def unserved_energy(timeline: list[PerformanceSample], dt: float = 1.0) -> float:
    return sum(max(0.0, s.demanded - s.served) for s in timeline) * dt


def make_report(
    timeline: list[PerformanceSample],
    voll: float,
    dt: float = 1.0,
) -> ResilienceReport:
    if not timeline:
        raise EmptyTimeline("timeline has no samples")
    p_pre = timeline[0].index
    below = sum(dt for s in timeline if s.index < p_pre - RESTORATION_TOL)
    return ResilienceReport(
        loss_area=resilience_loss(timeline),
        unserved_energy=unserved_energy(timeline, dt),
        monetary_loss=monetary_loss(timeline, voll, dt),
        p_min=min(s.index for s in timeline),
        time_below_threshold=below,
    )
