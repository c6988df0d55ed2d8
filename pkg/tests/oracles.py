"""Independent brute-force re-implementations used as test oracles.

These are written against the documented contracts only and must not import
engine internals: plain dict-and-loop code, no shared helpers with the
package under test.
"""

import math


def agg_oracle(rows: list[dict], groupby: list[str], ops: list[str],
               fields: list[str], names: list[str]) -> list[dict]:
    seen: list[tuple] = []
    members: dict = {}
    for r in rows:
        key = tuple(r[g] for g in groupby)
        if key not in members:
            members[key] = []
            seen.append(key)
        members[key].append(r)
    out = []
    for key in seen:
        rec = {g: k for g, k in zip(groupby, key)}
        for op, fld, name in zip(ops, fields, names):
            vals = [m[fld] for m in members[key]
                    if isinstance(m.get(fld), (int, float))
                    and not isinstance(m.get(fld), bool)] if op != "count" else []
            if op == "count":
                rec[name] = len(members[key])
            elif not vals:
                rec[name] = None
            elif op == "sum":
                total = 0.0
                for v in vals:
                    total += v
                rec[name] = total
            elif op == "mean":
                total = 0.0
                for v in vals:
                    total += v
                rec[name] = total / len(vals)
            elif op == "min":
                best = vals[0]
                for v in vals[1:]:
                    if v < best:
                        best = v
                rec[name] = best
            elif op == "max":
                best = vals[0]
                for v in vals[1:]:
                    if v > best:
                        best = v
                rec[name] = best
        out.append(rec)
    return out


def stack_oracle(rows: list[dict], groupby: list[str], field: str,
                 sort_field: str | None = None) -> list[dict]:
    out = [dict(r) for r in rows]
    keys = []
    for r in rows:
        key = tuple(r[g] for g in groupby)
        if key not in keys:
            keys.append(key)
    for key in keys:
        idxs = [i for i, r in enumerate(rows)
                if tuple(r[g] for g in groupby) == key]
        if sort_field is not None:
            idxs = sorted(idxs, key=lambda i: rows[i][sort_field])
        running = 0.0
        for i in idxs:
            v = rows[i][field]
            v = float(v) if isinstance(v, (int, float)) and not isinstance(v, bool) else 0.0
            out[i]["y0"] = running
            out[i]["y1"] = running + v
            running += v
    return out


def pie_oracle(values: list[float], start: float = 0.0) -> list[tuple[float, float]]:
    total = 0.0
    for v in values:
        total += v
    angles = []
    prefix = 0.0
    for v in values:
        if total == 0:
            angles.append((start, start))
        else:
            angles.append((start + 2 * math.pi * prefix / total,
                           start + 2 * math.pi * (prefix + v) / total))
        prefix += v
    return angles


def bin_oracle(values: list[float], extent, maxbins: int) -> list[tuple[float, float]]:
    if extent == "auto":
        lo, hi = min(values), max(values)
    else:
        lo, hi = extent
    span = hi - lo
    if span <= 0:
        step = 1.0
    else:
        step = None
        k = math.floor(math.log10(span / maxbins)) if span / maxbins > 0 else 0
        candidates = []
        for kk in range(k - 1, k + 3):
            for m in (1.0, 2.0, 5.0):
                candidates.append(m * 10.0 ** kk)
        for c in sorted(candidates):
            if c + 1e-12 * c >= span / maxbins and math.ceil(span / c - 1e-12) <= maxbins:
                step = c
                break
        assert step is not None
    return [(math.floor(v / step) * step, math.floor(v / step) * step + step)
            for v in values]


def band_position_oracle(n: int, i: int, r0: float, r1: float,
                         pi: float, po: float) -> tuple[float, float]:
    """(position, bandwidth) straight from the published formula."""
    step = (r1 - r0) / (n - pi + 2 * po)
    return r0 + step * (po + i), step * (1 - pi)
