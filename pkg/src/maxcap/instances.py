"""Synthetic instance generation and the on-disk ``.mcp`` text format.

Geometry follows the classic planar recipe: demand zones, candidate
locations, and incumbent competitor facilities are drawn uniformly on a
square, utilities decay linearly in Euclidean distance (``v = -beta * c``
for candidates, ``v = -beta * alpha * c`` for competitors), and each zone's
attraction vector is divided by its competitor aggregate so the outside
option carries total attraction 1.  Mixed-logit instances add zone- and
location-specific taste noise and are expanded into plain multinomial
instances with one zone per (zone, draw) pair.

Randomness is reproducible by construction: streams are PCG64 generators
seeded with ``SeedSequence([seed, stream_id])`` (0 = zone coordinates,
1 = candidate coordinates, 2 = competitor coordinates, 3 = taste noise),
and normal variates come from a fixed Box-Muller transform of uniforms
rather than the library's rejection sampler.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .choice_models import ChoiceModel, MultinomialLogit, NestedLogit
from .objective import Instance, Zone

__all__ = [
    "GeneratorParams",
    "MmnlParams",
    "FormatError",
    "generate_euclidean",
    "mmnl_expand",
    "assign_nests",
    "write_instance",
    "read_instance",
]

# deterministic utilities beyond this magnitude are clamped to keep exp() sane
UTILITY_CLAMP = 50.0


class FormatError(ValueError):
    """Raised when an ``.mcp`` file cannot be parsed."""


@dataclass(frozen=True)
class GeneratorParams:
    """Planar generator settings.

    ``alpha`` scales how strongly competitor utilities decay with distance
    (their utility is ``-beta * alpha * c``); ``beta`` is the customers'
    distance sensitivity.  ``plane_side`` is the side of the square the
    points are drawn from; the default keeps clamping inactive for the
    standard alpha/beta grids.  Demand weights are uniform (q = 1).
    """

    zones: int
    locations: int
    competitors: int = 5
    alpha: float = 0.1
    beta: float = 1.0
    plane_side: float = 30.0
    seed: int = 0

    def __post_init__(self):
        if self.zones < 1 or self.locations < 1 or self.competitors < 1:
            raise ValueError("zones, locations and competitors must all be >= 1")
        if not (self.alpha > 0 and self.beta > 0 and self.plane_side > 0):
            raise ValueError("alpha, beta and plane_side must be positive")


@dataclass(frozen=True)
class MmnlParams:
    """Mixed-logit expansion settings: taste sensitivity theta and K draws."""

    theta: float
    samples: int
    seed: int = 0

    def __post_init__(self):
        if not self.theta > 0:
            raise ValueError("theta must be positive")
        if self.samples < 1:
            raise ValueError("sample count must be >= 1")


def _stream(seed: int, stream_id: int) -> np.random.Generator:
    return np.random.default_rng([seed, stream_id])


def _standard_normal(rng: np.random.Generator, shape) -> np.ndarray:
    # Box-Muller on (0, 1] uniforms; fixed transform so draws are portable
    u1 = 1.0 - rng.random(shape)
    u2 = rng.random(shape)
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


def _exp_utility(v: np.ndarray, label: str) -> np.ndarray:
    clipped = int((np.abs(v) > UTILITY_CLAMP).sum())
    if clipped:
        warnings.warn(
            f"clamped {clipped} {label} utilities to |v| <= {UTILITY_CLAMP:g}",
            RuntimeWarning,
            stacklevel=3,
        )
        v = np.clip(v, -UTILITY_CLAMP, UTILITY_CLAMP)
    return np.exp(v)


def _geometry(p: GeneratorParams):
    """Zone-to-candidate and zone-to-competitor distance matrices."""
    zone_xy = _stream(p.seed, 0).uniform(0.0, p.plane_side, (p.zones, 2))
    cand_xy = _stream(p.seed, 1).uniform(0.0, p.plane_side, (p.locations, 2))
    comp_xy = _stream(p.seed, 2).uniform(0.0, p.plane_side, (p.competitors, 2))
    c_cand = np.sqrt(((zone_xy[:, None, :] - cand_xy[None, :, :]) ** 2).sum(axis=2))
    c_comp = np.sqrt(((zone_xy[:, None, :] - comp_xy[None, :, :]) ** 2).sum(axis=2))
    return c_cand, c_comp


def _competitor_aggregate(c_comp: np.ndarray, beta: float, alpha: float) -> np.ndarray:
    return _exp_utility(-beta * alpha * c_comp, "competitor").sum(axis=1)


def generate_euclidean(p: GeneratorParams, model: ChoiceModel) -> Instance:
    """Planar instance with competitor-normalized attractions, q = 1 per zone."""
    model.check_dimension(p.locations)
    c_cand, c_comp = _geometry(p)
    u = _competitor_aggregate(c_comp, p.beta, p.alpha)
    y = _exp_utility(-p.beta * c_cand, "location") / u[:, None]
    zones = [Zone(1.0, y[i]) for i in range(p.zones)]
    return Instance(zones, model)


def _mmnl_with_noise(p: GeneratorParams, theta: float, tau: np.ndarray) -> Instance:
    c_cand, c_comp = _geometry(p)
    u = _competitor_aggregate(c_comp, theta, p.alpha)
    k = tau.shape[1]
    zones = []
    for i in range(p.zones):
        v = -theta * c_cand[i][None, :] + c_cand[i][None, :] * tau[i] / 3.0
        y = _exp_utility(v, "location") / u[i]
        for draw in range(k):
            zones.append(Zone(1.0 / k, y[draw]))
    return Instance(zones, MultinomialLogit())


def mmnl_expand(p: GeneratorParams, mp: MmnlParams) -> Instance:
    """Mixed-logit instance expanded to K * zones multinomial zones.

    Utilities are ``-theta * c + c * tau / 3`` with tau standard normal per
    (zone, draw, location); competitor utilities stay deterministic at
    ``-theta * alpha * c``.  ``mp.theta`` plays the distance-sensitivity
    role throughout (``p.beta`` is not used here), so with K = 1 and tau
    forced to zero the result collapses to ``generate_euclidean`` with
    beta = theta.  Zones are ordered draw-within-zone: expanded zone index
    ``i * K + k`` carries weight ``1 / K``.
    """
    tau = _standard_normal(_stream(mp.seed, 3), (p.zones, mp.samples, p.locations))
    return _mmnl_with_noise(p, mp.theta, tau)


def assign_nests(m: int, n_nests: int, mu) -> NestedLogit:
    """Partition locations into contiguous near-equal nests.

    Earlier nests take the larger blocks when m is not divisible: m = 59
    with five nests yields sizes 12, 12, 12, 12, 11.
    """
    mu = np.asarray(mu, dtype=float)
    if not 1 <= n_nests <= m:
        raise ValueError(f"need 1 <= nests <= m, got {n_nests} nests for m={m}")
    if mu.shape != (n_nests,):
        raise ValueError(f"expected {n_nests} dissimilarity parameters, got {mu.shape}")
    base, extra = divmod(m, n_nests)
    sizes = [base + 1 if l < extra else base for l in range(n_nests)]
    nest_of = np.repeat(np.arange(n_nests), sizes)
    return NestedLogit(nest_of, mu)


# -- the .mcp text format ------------------------------------------------------


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_instance(inst: Instance, path) -> None:
    """Serialize to the versioned text format; floats keep 17 significant digits."""
    model = inst.model
    lines = ["MCP 1"]
    if isinstance(model, NestedLogit):
        lines.append(f"model nested {model.n_nests}")
        lines.append("mu " + " ".join(_fmt(v) for v in model.mu))
        lines.append("nest " + " ".join(str(int(l) + 1) for l in model.nest_of))
    elif isinstance(model, MultinomialLogit):
        lines.append("model mnl")
    else:
        raise ValueError(f"unsupported model {model!r}")
    lines.append(f"m {inst.m}")
    lines.append(f"zones {inst.n_zones}")
    lines.append("q " + " ".join(_fmt(z.q) for z in inst.zones))
    lines.append("Y")
    for z in inst.zones:
        lines.append(" ".join(_fmt(v) for v in z.y))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


class _Reader:
    """Line cursor over an .mcp file; skips comments, reports 1-based line numbers."""

    def __init__(self, path):
        with open(path, "r", encoding="utf-8") as fh:
            raw = fh.read().split("\n")
        self.rows = [
            (n, line.strip())
            for n, line in enumerate(raw, start=1)
            if line.strip() and not line.lstrip().startswith("#")
        ]
        self.pos = 0
        self.path = str(path)

    def next(self, section: str):
        if self.pos >= len(self.rows):
            raise FormatError(f"{self.path}: unexpected end of file, missing section '{section}'")
        n, line = self.rows[self.pos]
        self.pos += 1
        return n, line

    def fail(self, lineno: int, message: str):
        raise FormatError(f"{self.path}:{lineno}: {message}")


def _parse_floats(reader, lineno, tokens, expected, what):
    if len(tokens) != expected:
        reader.fail(lineno, f"expected {expected} values for {what}, found {len(tokens)}")
    try:
        return np.array([float(t) for t in tokens])
    except ValueError:
        reader.fail(lineno, f"non-numeric value in {what}")


def read_instance(path) -> Instance:
    """Parse an ``.mcp`` file; malformed input raises :class:`FormatError`."""
    reader = _Reader(path)

    n, line = reader.next("header")
    tokens = line.split()
    if len(tokens) != 2 or tokens[0] != "MCP":
        reader.fail(n, "expected header 'MCP 1'")
    if tokens[1] != "1":
        reader.fail(n, f"unsupported format version '{tokens[1]}'")

    n, line = reader.next("model")
    tokens = line.split()
    if not tokens or tokens[0] != "model":
        reader.fail(n, "expected section 'model'")
    tag = tokens[1] if len(tokens) > 1 else ""
    mu = nest = None
    if tag == "mnl":
        pass
    elif tag == "nested":
        if len(tokens) != 3:
            reader.fail(n, "expected 'model nested <L>'")
        try:
            n_nests = int(tokens[2])
        except ValueError:
            reader.fail(n, f"invalid nest count '{tokens[2]}'")
        n, line = reader.next("mu")
        tokens = line.split()
        if not tokens or tokens[0] != "mu":
            reader.fail(n, "expected section 'mu'")
        mu = _parse_floats(reader, n, tokens[1:], n_nests, "mu")
        n, line = reader.next("nest")
        tokens = line.split()
        if not tokens or tokens[0] != "nest":
            reader.fail(n, "expected section 'nest'")
        try:
            nest = np.array([int(t) - 1 for t in tokens[1:]])
        except ValueError:
            reader.fail(n, "non-integer nest index")
    else:
        reader.fail(n, f"unsupported model '{tag}'")

    n, line = reader.next("m")
    tokens = line.split()
    if len(tokens) != 2 or tokens[0] != "m":
        reader.fail(n, "expected section 'm'")
    if not tokens[1].isdigit():
        reader.fail(n, f"invalid location count '{tokens[1]}'")
    m = int(tokens[1])

    n, line = reader.next("zones")
    tokens = line.split()
    if len(tokens) != 2 or tokens[0] != "zones":
        reader.fail(n, "expected section 'zones'")
    if not tokens[1].isdigit():
        reader.fail(n, f"invalid zone count '{tokens[1]}'")
    n_zones = int(tokens[1])

    n, line = reader.next("q")
    tokens = line.split()
    if not tokens or tokens[0] != "q":
        reader.fail(n, "expected section 'q'")
    q = _parse_floats(reader, n, tokens[1:], n_zones, "q")

    n, line = reader.next("Y")
    if line.split() != ["Y"]:
        reader.fail(n, "expected section 'Y'")
    rows = []
    for i in range(n_zones):
        n, line = reader.next(f"Y row {i + 1}")
        rows.append(_parse_floats(reader, n, line.split(), m, f"Y row {i + 1}"))

    if nest is not None and nest.size != m:
        raise FormatError(f"{reader.path}: nest assignment has {nest.size} entries, expected {m}")
    try:
        model = NestedLogit(nest, mu) if nest is not None else MultinomialLogit()
        zones = [Zone(q[i], rows[i]) for i in range(n_zones)]
        return Instance(zones, model)
    except ValueError as exc:
        raise FormatError(f"{reader.path}: {exc}") from exc
