"""Network specifications: subsystems, interconnection gains and roles.

A network is an ordered list of discrete-time LTI subsystems
``x[t+1] = A x[t] + B v[t]``, ``w[t] = C x[t]``. Followers come first and
are driven by ``v_i = sum_j L_ij w_j``; leaders come last and are driven by
the base-station command. Gains are stored sparsely, keyed by the 1-based
ids ``(to, from)``.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np

from .errors import InvalidProfile, ParseError, SchemaError

__all__ = [
    "Role",
    "BaseInputMode",
    "SubsystemModel",
    "GainMatrix",
    "NetworkSpec",
    "NetworkDims",
    "ValidationReport",
    "DimensionProfile",
    "parse_network_spec",
    "serialize_network_spec",
    "network_to_document",
    "load_network",
    "validate_network",
    "random_network",
    "scale_dynamics",
]


class Role(enum.Enum):
    FOLLOWER = "follower"
    LEADER = "leader"


class BaseInputMode(enum.Enum):
    """How the base command reaches the leaders.

    ``INDEPENDENT``: every leader gets its own slice of a stacked command, so
    the leader input matrix is block diagonal. ``SHARED``: all leaders receive
    the same command and the leader input matrices are stacked vertically.
    """

    INDEPENDENT = "independent"
    SHARED = "shared"


def _frozen(M) -> np.ndarray:
    arr = np.array(M, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {arr.shape}")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class SubsystemModel:
    id: int
    role: Role
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "role", Role(self.role))
        for name in ("A", "B", "C"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def p(self) -> int:
        return self.C.shape[0]

    @property
    def is_follower(self) -> bool:
        return self.role is Role.FOLLOWER


@dataclass(frozen=True, eq=False)
class GainMatrix:
    """Sparse interconnection gains ``{(to, from): L_ij}``; absent blocks are zero."""

    blocks: Mapping[tuple[int, int], np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        frozen = {(int(i), int(j)): _frozen(L) for (i, j), L in dict(self.blocks).items()}
        object.__setattr__(self, "blocks", MappingProxyType(frozen))

    def __len__(self):
        return len(self.blocks)


@dataclass(frozen=True)
class NetworkDims:
    n_f: int
    m_f: int
    p_f: int
    n_l: int
    p_l: int
    p_bar: int
    m_base: int


@dataclass(frozen=True, eq=False)
class NetworkSpec:
    subsystems: tuple[SubsystemModel, ...]
    gains: GainMatrix = field(default_factory=GainMatrix)
    base_input_mode: BaseInputMode = BaseInputMode.INDEPENDENT
    description: str = ""

    def __post_init__(self):
        object.__setattr__(self, "subsystems", tuple(self.subsystems))
        object.__setattr__(self, "base_input_mode", BaseInputMode(self.base_input_mode))
        if not isinstance(self.gains, GainMatrix):
            object.__setattr__(self, "gains", GainMatrix(self.gains))

    @property
    def followers(self) -> tuple[SubsystemModel, ...]:
        return tuple(s for s in self.subsystems if s.is_follower)

    @property
    def leaders(self) -> tuple[SubsystemModel, ...]:
        return tuple(s for s in self.subsystems if not s.is_follower)

    @property
    def n_followers(self) -> int:
        return len(self.followers)

    @property
    def n_leaders(self) -> int:
        return len(self.leaders)

    @property
    def dims(self) -> NetworkDims:
        fol, lea = self.followers, self.leaders
        if self.base_input_mode is BaseInputMode.SHARED:
            m_base = lea[0].m if lea else 0
        else:
            m_base = sum(s.m for s in lea)
        p_f = sum(s.p for s in fol)
        p_l = sum(s.p for s in lea)
        return NetworkDims(
            n_f=sum(s.n for s in fol),
            m_f=sum(s.m for s in fol),
            p_f=p_f,
            n_l=sum(s.n for s in lea),
            p_l=p_l,
            p_bar=p_f + p_l,
            m_base=m_base,
        )

    def subsystem(self, sid: int) -> SubsystemModel:
        for s in self.subsystems:
            if s.id == sid:
                return s
        raise KeyError(sid)


@dataclass(frozen=True)
class ValidationReport:
    errors: tuple[str, ...] = ()
    warnings: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.errors


# --------------------------------------------------------------------------
# document I/O


def _matrix(value, where: str) -> np.ndarray:
    if not isinstance(value, list):
        raise SchemaError(f"{where}: expected a nested array of rows")
    if not value:
        return np.zeros((0, 0))
    width = None
    for r, row in enumerate(value):
        if not isinstance(row, list):
            raise SchemaError(f"{where}: row {r} is not an array")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise SchemaError(f"{where}: ragged rows (row 0 has {width} entries, row {r} has {len(row)})")
        for x in row:
            if isinstance(x, bool) or not isinstance(x, (int, float)):
                raise SchemaError(f"{where}: non-numeric entry {x!r}")
    return np.array(value, dtype=np.float64).reshape(len(value), width)


def _require(obj: dict, key: str, where: str):
    if key not in obj:
        raise SchemaError(f"{where}: missing field '{key}'")
    return obj[key]


def parse_network_spec(text: str) -> NetworkSpec:
    """Parse a JSON network document.

    Raises
    ------
    ParseError
        The text is not JSON or its top level is not an object.
    SchemaError
        A required field is missing, a matrix is ragged, a role is unknown,
        or a gain block references an unknown id or targets a leader.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed network document: {exc}") from None
    if not isinstance(doc, dict):
        raise ParseError("network document must be a JSON object")

    raw_subs = _require(doc, "subsystems", "document")
    if not isinstance(raw_subs, list):
        raise SchemaError("document: 'subsystems' must be an array")
    subs = []
    seen = set()
    for k, item in enumerate(raw_subs):
        where = f"subsystems[{k}]"
        if not isinstance(item, dict):
            raise SchemaError(f"{where}: expected an object")
        sid = _require(item, "id", where)
        if isinstance(sid, bool) or not isinstance(sid, int):
            raise SchemaError(f"{where}: id must be an integer")
        if sid in seen:
            raise SchemaError(f"{where}: duplicate id {sid}")
        seen.add(sid)
        role = _require(item, "role", where)
        try:
            role = Role(str(role).lower())
        except ValueError:
            raise SchemaError(f"{where}: unknown role {role!r}") from None
        subs.append(
            SubsystemModel(
                id=sid,
                role=role,
                A=_matrix(_require(item, "A", where), f"{where}.A"),
                B=_matrix(_require(item, "B", where), f"{where}.B"),
                C=_matrix(_require(item, "C", where), f"{where}.C"),
            )
        )

    roles = {s.id: s.role for s in subs}
    raw_gains = _require(doc, "gains", "document")
    if not isinstance(raw_gains, list):
        raise SchemaError("document: 'gains' must be an array")
    blocks = {}
    for k, item in enumerate(raw_gains):
        where = f"gains[{k}]"
        if not isinstance(item, dict):
            raise SchemaError(f"{where}: expected an object")
        to, frm = _require(item, "to", where), _require(item, "from", where)
        for name, sid in (("to", to), ("from", frm)):
            if sid not in roles:
                raise SchemaError(f"{where}: '{name}' references unknown subsystem {sid!r}")
        if roles[to] is not Role.FOLLOWER:
            raise SchemaError(f"{where}: gain block targets leader {to}; only followers receive gains")
        if (to, frm) in blocks:
            raise SchemaError(f"{where}: duplicate block ({to}, {frm})")
        blocks[(to, frm)] = _matrix(_require(item, "L", where), f"{where}.L")

    mode = doc.get("base_input_mode", BaseInputMode.INDEPENDENT.value)
    try:
        mode = BaseInputMode(str(mode).lower())
    except ValueError:
        raise SchemaError(f"document: unknown base_input_mode {mode!r}") from None

    return NetworkSpec(
        subsystems=tuple(subs),
        gains=GainMatrix(blocks),
        base_input_mode=mode,
        description=str(doc.get("description", "")),
    )


def network_to_document(spec: NetworkSpec) -> dict:
    doc = {}
    if spec.description:
        doc["description"] = spec.description
    doc["base_input_mode"] = spec.base_input_mode.value
    doc["subsystems"] = [
        {"id": s.id, "role": s.role.value, "A": s.A.tolist(), "B": s.B.tolist(), "C": s.C.tolist()}
        for s in spec.subsystems
    ]
    doc["gains"] = [
        {"to": i, "from": j, "L": L.tolist()} for (i, j), L in sorted(spec.gains.blocks.items(), key=lambda kv: kv[0])
    ]
    return doc


def serialize_network_spec(spec: NetworkSpec) -> str:
    """Serialize to JSON; floats are written with round-trip precision."""
    return json.dumps(network_to_document(spec), indent=2)


def load_network(path) -> NetworkSpec:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read network file '{path}': {exc.strerror or exc}") from None
    return parse_network_spec(text)


# --------------------------------------------------------------------------
# validation


def _pair_rank_deficient(A, B, tol=1e-10) -> bool:
    from .reach import controllability_matrix, numerical_rank

    rank, _ = numerical_rank(controllability_matrix(A, B), tol)
    return rank < A.shape[0]


def validate_network(spec: NetworkSpec) -> ValidationReport:
    """Check every structural invariant of ``spec``.

    Problems are collected rather than raised. Unreachable or unobservable
    subsystems and ``N_f <= N_l`` produce warnings only.
    """
    errors: list[str] = []
    warnings: list[str] = []
    subs = spec.subsystems
    ids = {s.id: s for s in subs}

    for pos, s in enumerate(subs, start=1):
        if s.id != pos:
            errors.append(f"subsystem at position {pos} has id {s.id}; ids must be 1..N in order")

    consistent = {}
    for s in subs:
        ok = True
        r, c = s.A.shape
        if r != c:
            errors.append(f"subsystem {s.id}: A is {r}x{c}, not square")
            ok = False
        if s.B.shape[0] != r:
            errors.append(f"subsystem {s.id}: B has {s.B.shape[0]} rows, A has {r}")
            ok = False
        if s.C.shape[1] != c:
            errors.append(f"subsystem {s.id}: C has {s.C.shape[1]} columns, A has {c}")
            ok = False
        for name, value in (("n", r), ("m", s.B.shape[1]), ("p", s.C.shape[0])):
            if value < 1:
                errors.append(f"subsystem {s.id}: dimension {name} must be >= 1")
                ok = False
        consistent[s.id] = ok

    roles = [s.role for s in subs]
    first_leader = next((k for k, r in enumerate(roles) if r is Role.LEADER), len(roles))
    if any(r is Role.FOLLOWER for r in roles[first_leader:]):
        errors.append("ordering: all followers must precede all leaders")

    nf, nl = spec.n_followers, spec.n_leaders
    if nf < 1:
        errors.append("network needs at least one follower")
    if nl < 1:
        errors.append("network needs at least one leader")
    if nf >= 1 and nl >= 1 and nf <= nl:
        warnings.append(f"N_f = {nf} <= N_l = {nl}; followers are expected to outnumber leaders")

    if spec.base_input_mode is BaseInputMode.SHARED:
        ms = {s.m for s in spec.leaders}
        if len(ms) > 1:
            errors.append(f"shared base input requires equal leader input dimensions, got {sorted(ms)}")

    for (i, j), L in spec.gains.blocks.items():
        name = f"gain block ({i}, {j})"
        if i not in ids or j not in ids:
            errors.append(f"{name}: references unknown subsystem")
            continue
        if not ids[i].is_follower:
            errors.append(f"{name}: target {i} is a leader; only followers receive gains")
        want = (ids[i].m, ids[j].p)
        if L.shape != want:
            errors.append(f"{name}: shape {L.shape[0]}x{L.shape[1]}, expected {want[0]}x{want[1]}")

    for s in subs:
        if not consistent[s.id]:
            continue
        if _pair_rank_deficient(s.A, s.B):
            warnings.append(f"subsystem {s.id}: (A, B) is not reachable")
        if _pair_rank_deficient(s.A.T, s.C.T):
            warnings.append(f"subsystem {s.id}: (A, C) is not observable")

    return ValidationReport(tuple(errors), tuple(warnings))


# --------------------------------------------------------------------------
# random generation


def _triple(item, where):
    if isinstance(item, Mapping):
        try:
            item = (item["n"], item["m"], item["p"])
        except KeyError as exc:
            raise InvalidProfile(f"{where}: missing key {exc}") from None
    try:
        n, m, p = (int(v) for v in item)
    except (TypeError, ValueError):
        raise InvalidProfile(f"{where}: expected (n, m, p)") from None
    return n, m, p


@dataclass(frozen=True)
class DimensionProfile:
    """Per-subsystem dimensions ``(n, m, p)`` for random networks.

    ``leader_coupling=False`` leaves every follower<-leader gain block absent,
    and ``follower_coupling=False`` does the same for follower<-follower blocks.
    """

    followers: tuple[tuple[int, int, int], ...]
    leaders: tuple[tuple[int, int, int], ...]
    base_input_mode: BaseInputMode = BaseInputMode.INDEPENDENT
    leader_coupling: bool = True
    follower_coupling: bool = True

    def __post_init__(self):
        object.__setattr__(self, "followers", tuple(_triple(t, "followers") for t in self.followers))
        object.__setattr__(self, "leaders", tuple(_triple(t, "leaders") for t in self.leaders))
        object.__setattr__(self, "base_input_mode", BaseInputMode(self.base_input_mode))

    @classmethod
    def scalar(cls, n_followers: int, n_leaders: int, **kw) -> "DimensionProfile":
        return cls(((1, 1, 1),) * n_followers, ((1, 1, 1),) * n_leaders, **kw)

    @classmethod
    def from_document(cls, doc: Mapping) -> "DimensionProfile":
        try:
            return cls(
                followers=doc["followers"],
                leaders=doc["leaders"],
                base_input_mode=doc.get("base_input_mode", "independent"),
                leader_coupling=bool(doc.get("leader_coupling", True)),
                follower_coupling=bool(doc.get("follower_coupling", True)),
            )
        except KeyError as exc:
            raise InvalidProfile(f"profile: missing field {exc}") from None
        except ValueError as exc:
            raise InvalidProfile(f"profile: {exc}") from None

    def to_document(self) -> dict:
        return {
            "followers": [list(t) for t in self.followers],
            "leaders": [list(t) for t in self.leaders],
            "base_input_mode": self.base_input_mode.value,
            "leader_coupling": self.leader_coupling,
            "follower_coupling": self.follower_coupling,
        }

    def check(self):
        if not self.followers or not self.leaders:
            raise InvalidProfile("profile needs at least one follower and one leader")
        for where, group in (("followers", self.followers), ("leaders", self.leaders)):
            for k, dims in enumerate(group):
                if min(dims) < 1:
                    raise InvalidProfile(f"{where}[{k}]: dimensions must be >= 1, got {dims}")
        if self.base_input_mode is BaseInputMode.SHARED and len({m for _, m, _ in self.leaders}) > 1:
            raise InvalidProfile("shared base input requires equal leader input dimensions")


def random_network(seed: int, profile: DimensionProfile | Sequence) -> NetworkSpec:
    """Draw a network with i.i.d. standard normal entries.

    Every subsystem matrix and every permitted gain block (including
    self-blocks ``L_ii``) is sampled from ``numpy.random.default_rng(seed)``
    in a fixed order, so the same ``(seed, profile)`` always gives the same
    network.
    """
    if not isinstance(profile, DimensionProfile):
        profile = DimensionProfile(*profile)
    profile.check()
    rng = np.random.default_rng(seed)
    dims = list(profile.followers) + list(profile.leaders)
    nf = len(profile.followers)

    subs = []
    for k, (n, m, p) in enumerate(dims):
        A = rng.standard_normal((n, n))
        B = rng.standard_normal((n, m))
        C = rng.standard_normal((p, n))
        role = Role.FOLLOWER if k < nf else Role.LEADER
        subs.append(SubsystemModel(id=k + 1, role=role, A=A, B=B, C=C))

    blocks = {}
    for i in range(nf):
        for j in range(len(dims)):
            allowed = profile.follower_coupling if j < nf else profile.leader_coupling
            if allowed:
                blocks[(i + 1, j + 1)] = rng.standard_normal((dims[i][1], dims[j][2]))

    return NetworkSpec(tuple(subs), GainMatrix(blocks), profile.base_input_mode)


def scale_dynamics(spec: NetworkSpec, factor: float) -> NetworkSpec:
    """Multiply every ``A_i`` and every gain block by ``factor``.

    The closed-loop matrices ``A_f``, ``B_f`` and ``A_l`` all scale by
    ``factor``; ``B_l`` and the output matrices are unchanged.
    """
    subs = tuple(SubsystemModel(s.id, s.role, factor * s.A, s.B, s.C) for s in spec.subsystems)
    gains = GainMatrix({k: factor * L for k, L in spec.gains.blocks.items()})
    return NetworkSpec(subs, gains, spec.base_input_mode, spec.description)
