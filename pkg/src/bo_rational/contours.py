"""Branch-cut geometry and integration contours.

Upper cuts are straight rays ``p + s e^{3 pi i/4}``.  When such a ray would
pass too close to another pole it is given a short initial dog-leg at a
nudged angle before turning into the asymptotic direction.  Lower cuts are
horizontal rays running left from each conjugate pole.

Contours are lists of :class:`~bo_rational.quadrature.Segment` and
:class:`~bo_rational.quadrature.Arc` pieces.  The through-contour C0 enters
along a diagonal line left of every cut, runs along the real axis (where the
Gaussian factor has unit modulus), and leaves along ``arg z = -pi/4`` to the
right of every conjugate pole.  Tails are truncated once the weight has
dropped by ``decay_digits`` decimal orders below its maximum on the contour.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .data import IndexClass, RationalData, integer_ratio
from .errors import GeometryInfeasible, PathCrossesCut, SingularityTooClose
from .quadrature import Arc, Segment, split_arcs

CUT_ANGLE = 0.75 * math.pi
CUT_DIR = cmath.exp(1j * CUT_ANGLE)
OUT_DIR = cmath.exp(-0.25j * math.pi)
_FAR = 1e6


def cut_key(z: complex, angle: float = CUT_ANGLE) -> float:
    """Coordinate transverse to cuts of direction ``angle``; constant along each such ray."""
    return (complex(z) * cmath.exp(-1j * (angle - 0.5 * math.pi))).real


# ---------------------------------------------------------------- distances

def _point_segment_distance(p, a, b):
    ab = b - a
    if ab == 0:
        return abs(p - a)
    s = ((p - a) * ab.conjugate()).real / abs(ab) ** 2
    s = min(1.0, max(0.0, s))
    return abs(p - (a + s * ab))


def _segments_intersect(a, b, c, d):
    def cross(u, v):
        return (u.conjugate() * v).imag

    d1 = cross(b - a, c - a)
    d2 = cross(b - a, d - a)
    d3 = cross(d - c, a - c)
    d4 = cross(d - c, b - c)
    return (d1 * d2 < 0) and (d3 * d4 < 0)


def _segment_segment_distance(a, b, c, d):
    if _segments_intersect(a, b, c, d):
        return 0.0
    return min(_point_segment_distance(a, c, d), _point_segment_distance(b, c, d),
               _point_segment_distance(c, a, b), _point_segment_distance(d, a, b))


# ------------------------------------------------------------ cut geometry

@dataclass(frozen=True)
class UpperCut:
    """Cut from ``pole`` heading off at ``angle``; optionally it first runs to ``bend``."""
    pole: complex
    bend: Optional[complex] = None
    nudge: float = 0.0
    angle: float = CUT_ANGLE

    @property
    def direction(self) -> complex:
        return cmath.exp(1j * self.angle)

    @property
    def anchor(self) -> complex:
        return self.pole if self.bend is None else self.bend

    @property
    def key(self) -> float:
        return cut_key(self.anchor, self.angle)

    def segments(self, far: float = _FAR):
        if self.bend is None:
            return [(self.pole, self.pole + far * self.direction)]
        return [(self.pole, self.bend), (self.bend, self.bend + far * self.direction)]

    def distance_to_point(self, z: complex) -> float:
        return min(_point_segment_distance(z, a, b) for a, b in self.segments())

    def distance_to_cut(self, other: "UpperCut") -> float:
        return min(_segment_segment_distance(a, b, c, d)
                   for a, b in self.segments() for c, d in other.segments())

    def first_direction(self) -> complex:
        if self.bend is None:
            return self.direction
        v = self.bend - self.pole
        return v / abs(v)


@dataclass(frozen=True)
class CutGeometry:
    """Cuts in left-to-right order near infinity.

    ``order[k]`` is the caller's index of the pole placed at position k.
    """
    poles: tuple
    coeffs: tuple
    epsilon: float
    order: tuple
    upper_cuts: tuple
    delta: float
    clearance: float
    angle: float = CUT_ANGLE

    @property
    def direction(self) -> complex:
        """Common asymptotic direction of the upper cuts."""
        return cmath.exp(1j * self.angle)

    @property
    def lower_cut_starts(self):
        return tuple(p.conjugate() for p in self.poles)

    def jump_free(self, k: int) -> bool:
        """True when the weight is continuous across both cuts of pole k (integer i c/eps)."""
        return integer_ratio(self.coeffs[k], self.epsilon) is not None

    def sorted_data(self) -> RationalData:
        return RationalData(self.poles, self.coeffs, self.epsilon)


@dataclass
class GeometryParams:
    clearance_min: float = 0.25
    nudge_angles: tuple = (math.pi / 6, -math.pi / 6, math.pi / 4, -math.pi / 4, math.pi / 3, -math.pi / 3)
    nudge_lengths: tuple = (2.0, 4.0, 8.0, 16.0)
    decay_digits: float = 18.0


def _default_clearance(poles, params: GeometryParams) -> float:
    c = min(params.clearance_min, 0.25 * min(p.imag for p in poles))
    for i in range(len(poles)):
        for j in range(i + 1, len(poles)):
            c = min(c, 0.25 * abs(poles[i] - poles[j]))
    return c


def build_cut_geometry(data: RationalData, params: GeometryParams | None = None) -> CutGeometry:
    params = params or GeometryParams()
    poles = list(data.poles)
    clearance = _default_clearance(poles, params)
    n = len(poles)
    cuts = [UpperCut(p) for p in poles]
    settled = set()

    def clashes(k, cut):
        for m in range(n):
            if m == k:
                continue
            if cut.distance_to_point(poles[m]) < clearance:
                return True
            if cut.distance_to_point(poles[m].conjugate()) < clearance:
                return True
            if m in settled:
                if cut.distance_to_cut(cuts[m]) < 0.5 * clearance:
                    return True
        return False

    # poles lower along the cut direction are bent first so outer rays stay straight
    for k in sorted(range(n), key=lambda k: (cut_key(poles[k]), poles[k].imag)):
        settled.add(k)
        if not clashes(k, cuts[k]):
            continue
        for ang in params.nudge_angles:
            for length in params.nudge_lengths:
                bend = poles[k] + length * clearance * cmath.exp(1j * (0.75 * math.pi + ang))
                cand = UpperCut(poles[k], bend, ang)
                if not clashes(k, cand):
                    cuts[k] = cand
                    break
            else:
                continue
            break
        else:
            raise GeometryInfeasible(f"no admissible cut for pole {poles[k]}")
    for k in range(n):
        for m in range(k + 1, n):
            if cuts[k].distance_to_cut(cuts[m]) < 0.5 * clearance:
                raise GeometryInfeasible(f"cuts from {poles[k]} and {poles[m]} are too close")

    order = sorted(range(n), key=lambda k: (cuts[k].key, poles[k].imag))
    return CutGeometry(
        poles=tuple(poles[k] for k in order),
        coeffs=tuple(data.coeffs[k] for k in order),
        epsilon=data.epsilon,
        order=tuple(order),
        upper_cuts=tuple(cuts[k] for k in order),
        delta=0.5 * min(p.imag for p in poles),
        clearance=clearance,
    )


def descent_cut(geometry: CutGeometry, k: int, x: float) -> Optional[UpperCut]:
    """Dog-legged replacement for cut k along which the weight decays monotonically, or None.

    With ``a = Re p - x`` and ``b = Im p`` the Gaussian's log-modulus along a
    ray from p is proportional to ``(a + s cos theta)(b + s sin theta)``.  When
    ``a > b`` the straight cut climbs a hump whose height is then cancelled by
    oscillation.  The replacement leaves p at an angle with no interior
    maximum, and turns into the standard direction once ``Re <= Im`` relative
    to x, after which the decay is monotone again.

    The loop around the new cut is integrated by continuation.  If the region
    swept between old and new cut holds other poles, the loop differs from the
    original one by constant multiples of their own loops (poles where the
    weight vanishes contribute nothing), which is a row operation that leaves
    every determinant unchanged.  None is returned when no hump exists or
    every candidate passes too close to another pole.
    """
    cut = geometry.upper_cuts[k]
    p = cut.pole
    a, b = p.real - x, p.imag
    if a <= b:
        return None
    tangent = math.atan2(b, a)
    others = [q for m, q in enumerate(geometry.poles) if m != k]
    # any direction between up-left at the tangent angle and down-left descends
    angles = list(math.pi - tangent * np.linspace(1.0, 0.0, 21))
    angles += [math.pi + tilt for tilt in (0.15, 0.3, 0.5)]
    best, best_gap = None, 0.0
    for theta in angles:
        base_length = (a - b) / (math.sin(theta) - math.cos(theta))
        for stretch in (1.0, 1.15, 1.4):
            bend = p + (stretch * base_length + 0.5 * geometry.clearance) * cmath.exp(1j * theta)
            if bend.imag < geometry.delta:
                continue
            new = UpperCut(p, bend, theta - cut.angle, cut.angle)
            gap = min((new.distance_to_point(q) for q in others), default=math.inf)
            if gap >= 0.25 * geometry.clearance:
                return new
            if gap > best_gap:
                best, best_gap = new, gap
    # a near miss only shrinks the loop radius
    return best if best_gap >= 0.02 * geometry.clearance else None


def with_cut(geometry: CutGeometry, k: int, cut: UpperCut) -> CutGeometry:
    cuts = list(geometry.upper_cuts)
    cuts[k] = cut
    return replace(geometry, upper_cuts=tuple(cuts))


# ---------------------------------------------------------------- contours

@dataclass
class Contour:
    pieces: list
    kind: str
    truncation_radius: float = 0.0
    endpoint_exponent: Optional[complex] = None
    # piece where the weight is anchored to its cut-plane value before being
    # continued along the chain; None means cut-plane values throughout
    anchor: Optional[int] = None

    @property
    def continued(self) -> bool:
        return self.anchor is not None

    @property
    def vertices(self) -> list:
        pts = [self.pieces[0].start]
        for p in self.pieces:
            pts.append(p.end)
        return pts

    def reversed(self) -> "Contour":
        anchor = None if self.anchor is None else len(self.pieces) - 1 - self.anchor
        return Contour([p.reversed() for p in reversed(self.pieces)], self.kind, self.truncation_radius, None,
                       anchor)


@dataclass
class ContourSet:
    """Contours for one (t, x): C0, one closed piece per non-exceptional index
    (U-loop or circle) and one terminating path per exceptional index.

    Row contour C_n is the sum of the loops of indices 1..n when n is
    non-exceptional.  An exceptional row is its terminating path, plus the
    loops listed in ``ray_loops`` when that path starts between cuts.
    """
    c0: Contour
    loops: dict
    rays: dict
    classes: list
    ray_loops: dict = field(default_factory=dict)

    def row_members(self, n: int) -> list:
        """Loop indices (0-based) summed into row contour C_{n+1}."""
        if self.classes[n].exceptional:
            return list(self.ray_loops.get(n, []))
        return [m for m in range(n + 1) if not self.classes[m].exceptional]


def _piece_samples(piece, n=65):
    s = np.linspace(0.0, 1.0, n)
    return piece.point(s)


def _tail_length(ctx, start: complex, direction: complex, ref_level: float, digits: float) -> float:
    """Smallest length L with Re log-weight at start + L*direction below ref_level - digits*ln10,
    while the weight keeps decreasing beyond L."""
    eps_t = ctx.t * ctx.data.epsilon
    drop = digits * math.log(10.0) + 5.0
    length = math.sqrt(4.0 * eps_t * drop) + 1.0
    for _ in range(60):
        zs = start + direction * np.linspace(0.0, length, 257)
        with np.errstate(divide="ignore", invalid="ignore"):
            # start may be the pole itself, where the weight vanishes
            lw = ctx.log_weight(zs).real
        end_ok = lw[-1] <= ref_level - drop and lw[-1] <= lw[-2]
        if end_ok:
            above = np.nonzero(~(lw < ref_level - drop))[0]
            last = int(above[-1]) + 1 if above.size else 1
            return length * min(last + 1, 256) / 256.0
        length *= 1.5
    raise GeometryInfeasible("tail does not decay")


def _check_clear(path_pts, singular_pts, clearance, allowed=()):
    for z in path_pts:
        for s in singular_pts:
            if any(abs(s - a) == 0 for a in allowed):
                continue
            if abs(z - s) < 0.999 * clearance:
                raise SingularityTooClose(f"path point {z} within {abs(z - s):.3g} of singularity {s}")


def check_path(pieces, geometry: CutGeometry, ignore_cuts=()) -> None:
    """Raise PathCrossesCut if any piece crosses an upper or lower cut across which the weight jumps."""
    lower = [(k, p.conjugate(), p.conjugate() - _FAR) for k, p in enumerate(geometry.poles)
             if not geometry.jump_free(k)]
    for piece in pieces:
        if isinstance(piece, Segment):
            segs = [(piece.a, piece.b)]
        else:
            pts = _piece_samples(piece, 33)
            segs = list(zip(pts[:-1], pts[1:]))
        for a, b in segs:
            for k, cut in enumerate(geometry.upper_cuts):
                if k in ignore_cuts or geometry.jump_free(k):
                    continue
                for c, d in cut.segments():
                    if _segments_intersect(a, b, c, d):
                        raise PathCrossesCut(f"segment {a}->{b} crosses cut {k + 1}")
            for k, c, d in lower:
                if _segments_intersect(a, b, c, d):
                    raise PathCrossesCut(f"segment {a}->{b} crosses a lower cut at {c}")


def _entry_and_exit(geometry: CutGeometry, x: float):
    """Real-axis points where C0 turns: left of every upper cut, right of every conjugate pole."""
    ang = geometry.angle
    left_limit = min(min(cut_key(cut.pole, ang), cut.key) for cut in geometry.upper_cuts)
    x_in = min(x, (left_limit - 1.01 * geometry.clearance) / math.sin(ang))
    x_out = max(x, max(p.real - p.imag for p in geometry.poles) + geometry.clearance * math.sqrt(2.0) * 1.01)
    return x_in, x_out


def _loop_standoff(geometry: CutGeometry, k: int, continued: bool = False) -> float:
    cut = geometry.upper_cuts[k]
    d = geometry.clearance
    for m, p in enumerate(geometry.poles):
        if m != k:
            d = min(d, 0.45 * cut.distance_to_point(p))
            # a continued loop may cross other cuts
            if not (continued or geometry.jump_free(m)):
                d = min(d, 0.45 * geometry.upper_cuts[m].distance_to_cut(cut))
    d = min(d, 0.5 * geometry.poles[k].imag)
    return d


def _u_loop(ctx, geometry: CutGeometry, k: int, radius: float, digits: float, ref=None) -> list:
    cut = geometry.upper_cuts[k]
    p = cut.pole
    d1 = cut.first_direction()
    phi1 = cmath.phase(d1)
    nl1, nr1 = d1 * 1j, d1 * -1j
    arc = Arc(p, radius, phi1 + 0.5 * math.pi, phi1 + 1.5 * math.pi)
    if cut.bend is None:
        left_near, right_near = p + radius * nl1, p + radius * nr1
        left_mid = right_mid = None
        nl2, nr2 = nl1, nr1
    else:
        q = cut.bend
        nl2, nr2 = cut.direction * 1j, cut.direction * -1j
        left_near, right_near = p + radius * nl1, p + radius * nr1
        left_mid = _miter(q, d1, cut.direction, radius, +1)
        right_mid = _miter(q, d1, cut.direction, radius, -1)
    base = cut.anchor
    lw_ref = ref if ref is not None else float(np.max(ctx.log_weight(_piece_samples(arc)).real))
    left_start = base + radius * nl2
    right_start = base + radius * nr2
    out = cut.direction
    lw_ref = max(lw_ref, float(np.max(ctx.log_weight(left_start + out * np.linspace(0, 50, 201)).real)))
    length = max(_tail_length(ctx, left_start, out, lw_ref, digits),
                 _tail_length(ctx, right_start, out, lw_ref, digits))
    left_far = left_start + length * out
    right_far = right_start + length * out
    pieces = []
    if left_mid is None:
        pieces.append(Segment(left_far, left_near))
    else:
        pieces += [Segment(left_far, left_mid), Segment(left_mid, left_near)]
    pieces.append(arc)
    if right_mid is None:
        pieces.append(Segment(right_near, right_far))
    else:
        pieces += [Segment(right_near, right_mid), Segment(right_mid, right_far)]
    return pieces


def _miter(q, d1, d2, r, side):
    """Offset corner at bend q between directions d1 then d2, on the left (+1) or right (-1)."""
    n1 = d1 * 1j * side
    n2 = d2 * 1j * side
    a1 = q + r * n1
    a2 = q + r * n2
    # solve a1 + s d1 = a2 + u d2
    m = np.array([[d1.real, -d2.real], [d1.imag, -d2.imag]])
    rhs = np.array([(a2 - a1).real, (a2 - a1).imag])
    s, _ = np.linalg.solve(m, rhs)
    return a1 + s * d1


def circle_radius(ctx, geometry: CutGeometry, k: int, continued: bool = False) -> float:
    """Radius of the arc around pole k (residue circle or U-loop turn).

    Bounded by the standoff and by the local Gaussian gradient so the weight
    varies by at most a factor e^3 around the circle.
    """
    p = geometry.poles[k]
    grad = abs(p - ctx.x) / (2.0 * ctx.t * ctx.data.epsilon)
    r = _loop_standoff(geometry, k, continued)
    if grad > 0:
        r = min(r, max(3.0 / grad, 1e-6 * r))
    return r


def _approach_ok(pieces, geometry: CutGeometry, k: int) -> bool:
    p = geometry.poles[k]
    singular = [q for m, q in enumerate(geometry.poles) if m != k] + list(geometry.lower_cut_starts)
    try:
        check_path(pieces, geometry, ignore_cuts=(k,))
    except PathCrossesCut:
        return False
    last = pieces[-1]
    if any(_point_segment_distance(q, last.a, last.b) < geometry.clearance for q in singular):
        return False
    # the final approach may touch its own cut only at p
    shortened = last.a + (1.0 - 1e-9) * (p - last.a)
    for c, d in geometry.upper_cuts[k].segments():
        if _segments_intersect(last.a, shortened, c, d):
            return False
    return True


def _gaussian_rises_to_end(ctx, pieces, x: float) -> bool:
    """True when the Gaussian factor of the weight nowhere exceeds its value at the chain's end by e."""
    pts = np.concatenate([_piece_samples(piece, 129) for piece in pieces])
    w = pts - x
    level = w.real * w.imag
    end = level[-1]
    return bool(np.max(level) <= end + 2.0 * ctx.t * ctx.data.epsilon)


def _along_own_cut(ctx, geometry: CutGeometry, k: int, digits: float):
    p = geometry.poles[k]
    cut = geometry.upper_cuts[k]
    near = p + 1e-3 * geometry.clearance * cut.first_direction()
    ref_pts = np.array([near] if cut.bend is None else [near, cut.anchor])
    ref = float(np.max(ctx.log_weight(ref_pts).real))
    length = _tail_length(ctx, cut.anchor, cut.direction, ref, digits)
    pieces = [Segment(cut.anchor + length * cut.direction, cut.anchor)]
    if cut.bend is not None:
        pieces.append(Segment(cut.bend, p))
    return pieces, True, None


def _exceptional_path(ctx, geometry: CutGeometry, k: int, left: list, x: float, digits: float):
    """Path ending at the exceptional pole k, whether it runs in from a cut, and its anchor.

    For x >= Re p the weight decreases monotonically toward p along the pole's
    own cut (where it is single valued), so the path runs in along the cut and
    the loops of the cuts to its left restore the homotopy class.  Otherwise
    the path follows C0 up to x and then heads straight for p, along which the
    weight increases monotonically.  When that approach is blocked the path
    runs in along the own cut if the weight still decays along it, or else
    along a descent cut, integrated by continuation from a point next to p;
    poles swept on the way only add multiples of other rows.
    """
    p = geometry.poles[k]
    if x >= p.real:
        return _along_own_cut(ctx, geometry, k, digits)
    xc = complex(x, 0.0)
    candidates = [[Segment(xc, p)]]
    for r0 in [p.real, p.real + p.imag] + [p.real + p.imag * math.tan(a) for a in (0.25, -0.25, 0.6, -0.6, 1.0)]:
        if r0 > x:
            candidates.append([Segment(xc, complex(r0, 0.0)), Segment(complex(r0, 0.0), p)])
    for tail in candidates:
        if _gaussian_rises_to_end(ctx, tail, x) and _approach_ok(left + tail, geometry, k):
            return left + tail, False, None
    if p.real - x <= p.imag:
        # no hump along the cut yet
        return _along_own_cut(ctx, geometry, k, digits)
    bent = descent_cut(geometry, k, x)
    if bent is None:
        raise GeometryInfeasible(f"no clear approach to exceptional pole {p}")
    gap = min((bent.distance_to_point(q) for m, q in enumerate(geometry.poles) if m != k), default=1.0)
    near = p + 0.25 * min(gap, geometry.clearance) * bent.first_direction()
    inner = np.linspace(0.0, 1.0, 65)
    ref = float(np.max(ctx.log_weight(near + (bent.bend - near) * inner).real))
    length = _tail_length(ctx, bent.bend, bent.direction, ref, digits)
    pieces = [Segment(bent.bend + length * bent.direction, bent.bend), Segment(bent.bend, near), Segment(near, p)]
    return pieces, True, 2


def _truncate_outward(ctx, chain, ref: float, drop: float) -> list:
    """Cut an outward-running chain of segments where the weight stays negligible to the end."""
    n = 129
    lw = np.concatenate([ctx.log_weight(_piece_samples(piece, n)).real for piece in chain])
    above = np.nonzero(~(lw < ref - drop))[0]
    last = int(above[-1]) if above.size else 0
    if last + 1 >= lw.size:
        return chain
    k, i = divmod(last + 1, n)
    if i == 0:
        return chain[:k]
    end = chain[k].point(np.array([i / (n - 1)]))[0]
    return chain[:k] + [Segment(chain[k].start, end)]


def _through_contour(ctx, geometry: CutGeometry, x: float, digits: float):
    """C0 as (left chain ending at x, right chain starting at x).

    Near x the contour follows the steepest-descent line of the Gaussian.  Left
    of x it runs at height +delta and right of x at -delta, where the Gaussian
    decays away from x, before leaving along the cut direction (left of every
    upper cut) and along arg z = -pi/4 (right of every conjugate pole).
    """
    drop = digits * math.log(10.0) + 5.0
    delta = geometry.delta
    ang = geometry.direction
    theta = geometry.angle
    limit = min(min(cut_key(cut.pole, theta), cut.key) for cut in geometry.upper_cuts) - 1.01 * geometry.clearance
    xc = complex(x, 0.0)
    p_in = xc + complex(-delta, delta)
    p_out = xc + complex(delta, -delta)
    x_in = min(p_in.real, (limit + delta * math.cos(theta)) / math.sin(theta))
    h_in = complex(x_in, delta)
    x_out = max(p_out.real, max(p.real - p.imag for p in geometry.poles) + delta
                + 1.01 * math.sqrt(2.0) * geometry.clearance)
    h_out = complex(x_out, -delta)
    core = np.concatenate([_piece_samples(Segment(p_in, xc)), _piece_samples(Segment(xc, p_out))])
    ref = float(np.max(ctx.log_weight(core).real))
    left = [Segment(xc, p_in)]
    if x_in < p_in.real:
        left.append(Segment(p_in, h_in))
    left.append(Segment(h_in, h_in + _tail_length(ctx, h_in, ang, ref, digits) * ang))
    right = [Segment(xc, p_out)]
    if x_out > p_out.real:
        right.append(Segment(p_out, h_out))
    right.append(Segment(h_out, h_out + _tail_length(ctx, h_out, OUT_DIR, ref, digits) * OUT_DIR))
    left = _truncate_outward(ctx, left, ref, drop)
    right = _truncate_outward(ctx, right, ref, drop)
    left_in = [piece.reversed() for piece in reversed(left)]
    return left_in, right


def build_contours(geometry: CutGeometry, classes: list, ctx, params: GeometryParams | None = None) -> ContourSet:
    """Build C0, the loops and the exceptional paths for the (t, x) in ``ctx``."""
    params = params or GeometryParams()
    digits = params.decay_digits
    x = float(ctx.x.real) if isinstance(ctx.x, complex) else float(ctx.x)
    left, right = _through_contour(ctx, geometry, x, digits)
    check_path(left + right, geometry)
    c0_pieces = left + right
    radius = max(abs(v) for v in (c0_pieces[0].a, c0_pieces[-1].b))
    c0 = Contour(c0_pieces, "C0", radius)

    loops, rays, extra_loops = {}, {}, {}
    for k, cls in enumerate(classes):
        if cls.exceptional:
            pieces, along_cut, anchor = _exceptional_path(ctx, geometry, k, left, x, digits)
            m = -round((1j * geometry.coeffs[k] / geometry.epsilon).real)
            rays[k] = Contour(pieces, f"exceptional_ray({k + 1})", radius, endpoint_exponent=complex(m - 1),
                              anchor=anchor)
            if along_cut:
                extra_loops[k] = [j for j in range(k) if not classes[j].exceptional]
        elif cls.integer_order is not None:
            r = circle_radius(ctx, geometry, k)
            p = geometry.poles[k]
            phi = cmath.phase(geometry.upper_cuts[k].first_direction())
            loops[k] = Contour([Arc(p, r, phi + 0.5 * math.pi, phi + 2.5 * math.pi)], f"circle({k + 1})", r)
        else:
            bent = descent_cut(geometry, k, x)
            g_k = geometry if bent is None else with_cut(geometry, k, bent)
            ctx_k = ctx if bent is None else type(ctx)(ctx.data, ctx.t, ctx.x, g_k)
            r = circle_radius(ctx_k, g_k, k, continued=bent is not None)
            pieces = _u_loop(ctx_k, g_k, k, r, digits)
            anchor = None
            if bent is not None:
                # the turn around p keeps its cut-plane values under the deformation
                pieces = split_arcs(pieces)
                anchor = next(j for j, piece in enumerate(pieces) if isinstance(piece, Arc))
            loops[k] = Contour(pieces, f"loop({k + 1})", max(abs(pieces[0].a), abs(pieces[-1].b)),
                               anchor=anchor)
    return ContourSet(c0, loops, rays, list(classes), extra_loops)
