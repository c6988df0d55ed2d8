"""Scale resolution: turn declarations plus dataflow results into total
mapping functions.

Band positions follow step = span / (n - paddingInner + 2*paddingOuter),
x(domain[i]) = r0 + step * (paddingOuter + i), bandwidth = step * (1 -
paddingInner). Extend-mode augmented compiles keep the base step and paddings
fixed and let the range grow, which is what leaves base categories in place.
"""

from dataclasses import dataclass, field

from .errors import EmptyDomainError, NonNumericDomainError, ScaleError
from .specmodel import PALETTE, DataRef, ScaleDecl, Spec


def _is_num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _domain_key(v):
    if isinstance(v, bool):
        return ("bool", v)
    if _is_num(v):
        return ("num", float(v))
    return ("str", str(v)) if isinstance(v, str) else ("null", "")


@dataclass
class ResolvedScale:
    name: str
    kind: str
    domain: list
    r0: float = 0.0
    r1: float = 0.0
    step: float = 0.0
    bandwidth: float = 0.0
    padding_inner: float = 0.0
    padding_outer: float = 0.0
    colors: list[str] = field(default_factory=list)
    _index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self._index:
            self._index = {_domain_key(v): i for i, v in enumerate(self.domain)}

    @property
    def slope(self) -> float:
        d0, d1 = self.domain
        return (self.r1 - self.r0) / (d1 - d0)

    @property
    def intercept(self) -> float:
        return self.r0 - self.domain[0] * self.slope

    def apply(self, v):
        if self.kind == "linear":
            if not _is_num(v):
                raise ScaleError(f"scale '{self.name}': non-numeric input {v!r}")
            d0 = self.domain[0]
            return self.r0 + (float(v) - d0) * self.slope
        idx = self._index.get(_domain_key(v))
        if idx is None:
            raise ScaleError(f"scale '{self.name}': {v!r} not in domain")
        if self.kind == "ordinal":
            return self.colors[idx % len(self.colors)]
        return self.r0 + self.step * (self.padding_outer + idx)


def _distinct_in_order(values) -> list:
    seen = set()
    out = []
    for v in values:
        k = _domain_key(v)
        if k not in seen:
            seen.add(k)
            out.append(v)
    return out


def _data_domain(decl: ScaleDecl, traces) -> list:
    ref: DataRef = decl.domain
    trace = traces.get(ref.data)
    if trace is None:
        raise EmptyDomainError(decl.name)
    table = trace.final
    if not table.rows:
        raise EmptyDomainError(decl.name)
    values = [r.cells.get(ref.field) for r in table.rows]
    if decl.kind == "linear":
        nums = [float(v) for v in values if _is_num(v)]
        if not nums:
            bad = next((v for v in values if not _is_num(v)), None)
            raise NonNumericDomainError(decl.name, bad)
        return [min(nums), max(nums)]
    return _distinct_in_order(values)


def resolve_scale(decl: ScaleDecl, traces) -> ResolvedScale:
    if isinstance(decl.domain, DataRef):
        domain = _data_domain(decl, traces)
    else:
        domain = list(decl.domain)
        if not domain:
            raise EmptyDomainError(decl.name)

    if decl.kind == "linear":
        if not all(_is_num(v) for v in domain):
            raise NonNumericDomainError(
                decl.name, next(v for v in domain if not _is_num(v)))
        d0, d1 = float(domain[0]), float(domain[1])
        if d0 == d1:
            d1 = d0 + 1.0  # degenerate data-driven domain: keep a total map
        return ResolvedScale(decl.name, "linear", [d0, d1],
                             float(decl.range[0]), float(decl.range[1]))

    if decl.kind == "ordinal":
        colors = list(PALETTE) if decl.range == "palette" else [str(c) for c in decl.range]
        return ResolvedScale(decl.name, "ordinal", domain, colors=colors)

    r0, r1 = float(decl.range[0]), float(decl.range[1])
    n = len(domain)
    if decl.kind == "band":
        pi = decl.padding_inner if decl.padding_inner is not None else 0.1
        po = decl.padding_outer if decl.padding_outer is not None else 0.05
        step = (r1 - r0) / (n - pi + 2 * po)
        return ResolvedScale(decl.name, "band", domain, r0, r1, step,
                             step * (1 - pi), pi, po)
    # point
    po = decl.padding_outer if decl.padding_outer is not None else 0.0
    if n == 1:
        return ResolvedScale(decl.name, "point", domain,
                             (r0 + r1) / 2, r1, 0.0, 0.0, 1.0, 0.0)
    step = (r1 - r0) / (n - 1 + 2 * po)
    return ResolvedScale(decl.name, "point", domain, r0, r1, step, 0.0, 1.0, po)


def resolve_scale_extended(decl: ScaleDecl, base: ResolvedScale,
                           traces) -> ResolvedScale:
    """Resolve against the augmented traces with extend-mode growth: band and
    point scales keep the base step and paddings and the range is widened to
    fit new domain values; linear and ordinal resolve normally (a changed
    auto-domain is exactly what check_scales must flag)."""
    if decl.kind in ("band", "point") and isinstance(decl.domain, DataRef):
        domain = _data_domain(decl, traces)
        n = len(domain)
        step = base.step
        if decl.kind == "band":
            r1 = base.r0 + step * (n - base.padding_inner + 2 * base.padding_outer)
        else:
            r1 = base.r0 + step * (n - 1 + 2 * base.padding_outer)
        return ResolvedScale(decl.name, decl.kind, domain, base.r0, r1, step,
                             base.bandwidth, base.padding_inner,
                             base.padding_outer)
    return resolve_scale(decl, traces)


def resolve_scales(spec: Spec, traces,
                   base_scales: dict[str, ResolvedScale] | None = None
                   ) -> dict[str, ResolvedScale]:
    out = {}
    for decl in spec.scales:
        if base_scales is not None and decl.name in base_scales:
            out[decl.name] = resolve_scale_extended(decl, base_scales[decl.name],
                                                    traces)
        else:
            out[decl.name] = resolve_scale(decl, traces)
    return out
