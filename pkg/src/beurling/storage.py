"""Plain-text cache for integer tables.

File layout::

    # primes_digest,x_max,count
    # <sha256 of the prime system>,<x_max>,<count>
    log_value,value,exponent_list
    0,1,
    0.69314718055994529,2,1:1
    ...

``exponent_list`` holds ``k:e`` pairs (1-based prime index) joined by ``;``.
"""

from __future__ import annotations

import hashlib
import os
from pathlib import Path

import numpy as np

from ._numeric import fmt
from .errors import ConfigError, ResourceError
from .system import IntegerTable, _prime_keys, enumerate_integers

HEADER = "# primes_digest,x_max,count"
COLUMNS = "log_value,value,exponent_list"


def cache_key(system, x_max):
    h = hashlib.sha256()
    h.update(system.digest().encode())
    h.update(repr(float(x_max)).encode())
    return h.hexdigest()


def cache_path(cache_dir, system, x_max):
    return Path(cache_dir) / f"table-{cache_key(system, x_max)[:20]}.csv"


def write_table(table, fh):
    fh.write(HEADER + "\n")
    fh.write(f"# {table.system.digest()},{fmt(table.x_max)},{len(table)}\n")
    fh.write(COLUMNS + "\n")
    ent, ks, es = table.factor_triples()
    order = np.lexsort((ks, ent))
    parts = [[] for _ in range(len(table))]
    for i, k, e in zip(ent[order].tolist(), ks[order].tolist(), es[order].tolist()):
        parts[i].append(f"{k + 1}:{e}")
    logs = table.log_values.tolist()
    vals = table.values.tolist()
    fh.writelines(f"{fmt(lv)},{fmt(v)},{';'.join(p)}\n" for lv, v, p in zip(logs, vals, parts))


def save_table(table, path):
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w", newline="\n") as fh:
        write_table(table, fh)
    os.replace(tmp, path)


def read_header(path):
    with open(path) as fh:
        first = fh.readline().rstrip("\n")
        second = fh.readline().rstrip("\n")
    if first != HEADER or not second.startswith("# "):
        raise ConfigError(f"{path}: not a table cache file")
    digest, x_max, count = second[2:].split(",")
    return digest, float(x_max), int(count)


def load_table(system, path):
    """Rebuild a table from a cache file written for ``system``.

    Returns ``None`` when the file belongs to another prime system.
    """
    digest, x_max, count = read_header(path)
    if digest != system.digest():
        return None
    logs = np.empty(count)
    vals = np.empty(count, dtype=np.int64 if system.exact_mode else float)
    rows, ks, es = [], [], []
    with open(path) as fh:
        for _ in range(3):
            fh.readline()
        n = 0
        for i, line in enumerate(fh):
            lv, v, ex = line.rstrip("\n").split(",")
            logs[i] = float(lv)
            vals[i] = int(v) if system.exact_mode else float(v)
            if ex:
                for pair in ex.split(";"):
                    k, e = pair.split(":")
                    rows.append(i)
                    ks.append(int(k) - 1)
                    es.append(int(e))
            n += 1
        if n != count:
            raise ConfigError(f"{path}: expected {count} rows, found {n}")
    rows = np.array(rows, dtype=np.int64)
    ks = np.array(ks, dtype=np.int64)
    es = np.array(es, dtype=np.int64)
    salt = _prime_keys(len(system))
    keys = np.zeros(count, dtype=np.uint64)
    np.add.at(keys, rows, salt[ks] * es.astype(np.uint64))
    omega = np.bincount(rows, minlength=count).astype(np.int16)
    # lead factor = largest prime index of each entry
    lead = np.full(count, -1, dtype=np.int64)
    lexp = np.zeros(count, dtype=np.int16)
    order = np.lexsort((ks, rows))
    last = np.ones(order.size, dtype=bool)
    last[:-1] = rows[order][1:] != rows[order][:-1]
    pick = order[last]
    lead[rows[pick]] = ks[pick]
    lexp[rows[pick]] = es[pick]
    # the entry without its lead factor: key minus lead contribution
    rest = np.full(count, -1, dtype=np.int64)
    nz = lead >= 0
    order = np.argsort(keys, kind="stable")
    sk = keys[order]
    want = keys[nz] - salt[lead[nz]] * lexp[nz].astype(np.uint64)
    pos = np.searchsorted(sk, want)
    rest[nz] = order[np.minimum(pos, count - 1)]
    return IntegerTable(system, x_max, logs, vals, rest, lead, lexp, omega, keys, salt)


def cached_table(system, x_max, cache_dir=None, cap=None, max_bytes=None, notice=None):
    """Enumerate, or load from ``cache_dir`` when a matching cache exists.

    A cache file that exists but does not match is rebuilt and ``notice``
    (a callable taking a message) is told so.
    """
    kwargs = {} if cap is None else {"cap": cap}
    if cache_dir is None:
        return enumerate_integers(system, x_max, max_bytes=max_bytes, **kwargs)
    Path(cache_dir).mkdir(parents=True, exist_ok=True)
    path = cache_path(cache_dir, system, x_max)
    if path.exists():
        try:
            _, cx, count = read_header(path)
            if cap is not None and count > cap:
                raise ResourceError(f"cached table holds {count} entries, above cap={cap}")
            table = load_table(system, path) if cx == float(x_max) else None
        except (ConfigError, ValueError):
            table = None
        if table is not None:
            return table
        if notice is not None:
            notice(f"stale table cache {path}; rebuilding")
    table = enumerate_integers(system, x_max, max_bytes=max_bytes, **kwargs)
    save_table(table, path)
    return table
