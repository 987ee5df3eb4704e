"""
Line-oriented candidate description.

    # comments and blank lines are ignored
    [function]
    name = my-candidate
    pole_order = 0
    residue_re = 0
    residue_im = 0
    theta_bound = 0
    ramanujan = 1, 0            # C, e' in |a_n| <= C n^e'
    N = 1000

    [gamma]
    epsilon_re = 1
    epsilon_im = 0
    Q = 0.5641895835477563
    factor = 0.5, 0, 0          # w, mu_re, mu_im (repeatable)

    [coefficients]
    a = 1, 1, 0                 # n, re, im (repeatable)
    euler = 2, -1, 0            # p, A1_re, A1_im, A2_re, A2_im, ... (repeatable)
    euler_default = -1, 0       # A1_re, A1_im, ... at primes without an euler line

    [check]
    xs = 0.7, 1, 1.4            # free-form keys consumed by the command

A `[function]` section may instead name `builtin = zeta | dirichlet | delta |
counterexample` (with `modulus`, `index`). A `[converse]` section with
`alpha`, `beta_re`, `beta_im`, `q` describes GL(2) parameters; its coefficients
come from `a` lines or `builtin = delta`.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

import structlog

from app.services.converse import GL2Params, delta_params
from app.services.lfunc import (
    DEFAULT_REALIZATION,
    GammaFactor,
    LocalPolynomial,
    SelbergFunction,
    builtin,
    from_coefficients,
    from_euler,
)
from app.utils.errors import ConfigError, LabError

logger = structlog.get_logger()

SECTION_KEYS: Dict[str, Tuple[str, ...]] = {
    "function": (
        "name", "builtin", "modulus", "index", "N", "pole_order",
        "residue_re", "residue_im", "theta_bound", "ramanujan",
    ),
    "gamma": ("epsilon_re", "epsilon_im", "Q", "factor"),
    "coefficients": ("a", "euler", "euler_default"),
    "converse": ("alpha", "beta_re", "beta_im", "q", "builtin", "N", "ramanujan"),
    # free-form
    "check": (),
}
REPEATABLE = {"factor", "a", "euler"}


@dataclass
class Entry:
    line: int
    key: str
    value: str


@dataclass
class ConfigDocument:
    sections: Dict[str, List[Entry]] = field(default_factory=dict)

    def entries(self, section: str, key: str) -> List[Entry]:
        return [e for e in self.sections.get(section, []) if e.key == key]

    def get(self, section: str, key: str) -> Optional[Entry]:
        found = self.entries(section, key)
        return found[0] if found else None

    @property
    def checks(self) -> Dict[str, str]:
        return {e.key: e.value for e in self.sections.get("check", [])}


def parse_document(text: str) -> ConfigDocument:
    """Split text into sections of key = value entries, rejecting unknown keys."""
    doc = ConfigDocument()
    current: Optional[str] = None
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if current not in SECTION_KEYS:
                raise ConfigError(f"unknown section [{current}]", line=number)
            if current in doc.sections:
                raise ConfigError(f"section [{current}] appears twice", line=number)
            doc.sections[current] = []
            continue
        if current is None:
            raise ConfigError("entry before any section header", line=number)
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=number)
        key, value = (part.strip() for part in line.split("=", 1))
        allowed = SECTION_KEYS[current]
        if allowed and key not in allowed:
            raise ConfigError(f"unknown key in [{current}]", line=number, field=key)
        if key not in REPEATABLE and any(e.key == key for e in doc.sections[current]):
            raise ConfigError(f"key given twice in [{current}]", line=number, field=key)
        doc.sections[current].append(Entry(number, key, value))
    return doc


def _floats(entry: Entry, count: Optional[int] = None) -> List[float]:
    try:
        values = [float(v) for v in entry.value.split(",")]
    except ValueError:
        raise ConfigError("expected comma-separated numbers", line=entry.line, field=entry.key)
    if count is not None and len(values) != count:
        raise ConfigError(f"expected {count} numbers, got {len(values)}", line=entry.line, field=entry.key)
    return values


def _float(doc: ConfigDocument, section: str, key: str, default: Optional[float] = None) -> Optional[float]:
    entry = doc.get(section, key)
    return default if entry is None else _floats(entry, 1)[0]


def _int(doc: ConfigDocument, section: str, key: str, default: Optional[int] = None) -> Optional[int]:
    entry = doc.get(section, key)
    if entry is None:
        return default
    try:
        return int(entry.value)
    except ValueError:
        raise ConfigError("expected an integer", line=entry.line, field=key)


def _complex(doc: ConfigDocument, section: str, prefix: str, default: Optional[complex] = None) -> Optional[complex]:
    re, im = doc.get(section, f"{prefix}_re"), doc.get(section, f"{prefix}_im")
    if re is None and im is None:
        return default
    return complex(
        _floats(re, 1)[0] if re else 0.0,
        _floats(im, 1)[0] if im else 0.0,
    )


def _ramanujan(doc: ConfigDocument, section: str) -> Tuple[float, float]:
    entry = doc.get(section, "ramanujan")
    if entry is None:
        return 1.0, 0.0
    C, e = _floats(entry, 2)
    return C, e


def _parse_gamma(doc: ConfigDocument) -> Optional[GammaFactor]:
    if "gamma" not in doc.sections:
        return None
    q_entry = doc.get("gamma", "Q")
    if q_entry is None:
        raise ConfigError("[gamma] needs Q", field="Q")
    factors = []
    for entry in doc.entries("gamma", "factor"):
        w, mu_re, mu_im = _floats(entry, 3)
        if mu_re < 0:
            raise ConfigError(
                f"gamma shifts need Re mu >= 0, got {mu_re}", line=entry.line, field="factor"
            )
        if w <= 0:
            raise ConfigError(f"gamma weights must be positive, got {w}", line=entry.line, field="factor")
        factors.append((w, complex(mu_re, mu_im)))
    epsilon = _complex(doc, "gamma", "epsilon", 1.0)
    try:
        return GammaFactor(epsilon, _floats(q_entry, 1)[0], tuple(factors))
    except LabError as e:
        raise ConfigError(getattr(e, "message", str(e)), line=q_entry.line, field="gamma")


def _explicit_coefficients(entries: List[Entry]) -> List[complex]:
    values: Dict[int, complex] = {}
    for entry in entries:
        n, re, im = _floats(entry, 3)
        if n < 1 or n != int(n):
            raise ConfigError(f"index must be a positive integer, got {n}", line=entry.line, field="a")
        if int(n) in values:
            raise ConfigError(f"a_{int(n)} given twice", line=entry.line, field="a")
        values[int(n)] = complex(re, im)
    top = max(values)
    return [values.get(n, 0j) for n in range(1, top + 1)]


def _pairs_to_complex(values: List[float], entry: Entry) -> List[complex]:
    if len(values) % 2:
        raise ConfigError("coefficients come in re, im pairs", line=entry.line, field=entry.key)
    return [complex(values[i], values[i + 1]) for i in range(0, len(values), 2)]


def _parse_function(doc: ConfigDocument) -> SelbergFunction:
    name_entry = doc.get("function", "name")
    N = _int(doc, "function", "N", DEFAULT_REALIZATION)
    tag = doc.get("function", "builtin")
    if tag is not None:
        return builtin(
            tag.value, N,
            modulus=_int(doc, "function", "modulus"),
            index=_int(doc, "function", "index"),
        )

    name = name_entry.value if name_entry else "candidate"
    gamma = _parse_gamma(doc)
    pole_order = _int(doc, "function", "pole_order", 0)
    residue = _complex(doc, "function", "residue", None)
    theta = _float(doc, "function", "theta_bound", 0.0)
    ramanujan = _ramanujan(doc, "function")

    a_lines = doc.entries("coefficients", "a")
    euler_lines = doc.entries("coefficients", "euler")
    default_line = doc.get("coefficients", "euler_default")
    if "coefficients" not in doc.sections or not (a_lines or euler_lines or default_line):
        raise ConfigError("missing [coefficients] section (or builtin)", field="coefficients")
    if a_lines and (euler_lines or default_line):
        raise ConfigError("give either 'a' or 'euler' lines, not both", line=a_lines[0].line, field="a")

    if a_lines:
        return from_coefficients(
            name, _explicit_coefficients(a_lines), gamma=gamma, pole_order=pole_order,
            residue=residue, ramanujan=ramanujan, theta_bound=theta,
        )
    factors = []
    for entry in euler_lines:
        values = _floats(entry)
        p = values[0]
        if p < 2 or p != int(p):
            raise ConfigError(f"prime must be an integer >= 2, got {p}", line=entry.line, field="euler")
        factors.append(LocalPolynomial(int(p), (1.0, *_pairs_to_complex(values[1:], entry))))
    default = None
    if default_line is not None:
        default = (1.0, *_pairs_to_complex(_floats(default_line), default_line))
    return from_euler(
        name, factors, N, gamma=gamma, default=default, pole_order=pole_order,
        residue=residue, ramanujan=ramanujan, theta_bound=theta,
    )


def _parse_converse(doc: ConfigDocument) -> GL2Params:
    tag = doc.get("converse", "builtin")
    if tag is not None:
        if tag.value != "delta":
            raise ConfigError("only builtin = delta is known to [converse]", line=tag.line, field="builtin")
        return delta_params(_int(doc, "converse", "N", 512))
    alpha = _float(doc, "converse", "alpha")
    if alpha is None:
        raise ConfigError("[converse] needs alpha", field="alpha")
    beta = _complex(doc, "converse", "beta", 0.5)
    q = _float(doc, "converse", "q", 1.0)
    a_lines = doc.entries("coefficients", "a")
    if not a_lines:
        raise ConfigError("[converse] needs 'a' lines in [coefficients]", field="a")
    C, e = _ramanujan(doc, "converse")
    return GL2Params(alpha, beta, q, tuple(_explicit_coefficients(a_lines)), C, e)


def parse_config(text: str) -> Union[SelbergFunction, GL2Params]:
    """A SelbergFunction from [function] or GL2Params from [converse]."""
    doc = parse_document(text)
    has_function = "function" in doc.sections
    has_converse = "converse" in doc.sections
    if has_function == has_converse:
        raise ConfigError("exactly one of [function] or [converse] is required")
    try:
        parsed = _parse_converse(doc) if has_converse else _parse_function(doc)
    except ConfigError:
        raise
    except LabError as e:
        if e.code in ("UNKNOWN_BUILTIN", "NO_SUCH_CHARACTER", "NON_PRIMITIVE_CHARACTER", "INVALID_MODULUS"):
            raise
        raise ConfigError(getattr(e, "message", str(e)), field="function" if has_function else "converse")
    logger.info("config_parsed", kind=type(parsed).__name__)
    return parsed
