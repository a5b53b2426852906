#!/usr/bin/env python3
"""Regenerates the bundled instance fixtures under fixtures/."""

import os
import random

ROOT = os.path.join(os.path.dirname(__file__), "..", "fixtures")

HAD12_FLOW = """
0 3 4 6 8 5 6 6 5 1 4 6
3 0 6 3 7 9 9 2 2 7 4 7
4 6 0 2 6 4 4 4 2 6 3 6
6 3 2 0 5 5 3 3 9 4 3 6
8 7 6 5 0 4 3 4 5 7 6 7
5 9 4 5 4 0 8 5 5 5 7 5
6 9 4 3 3 8 0 6 8 4 6 7
6 2 4 3 4 5 6 0 1 5 5 3
5 2 2 9 5 5 8 1 0 4 5 2
1 7 6 4 7 5 4 5 4 0 7 7
4 4 3 3 6 7 6 5 5 7 0 9
6 7 6 6 7 5 7 3 2 7 9 0
"""

HAD12_DIST = """
0 1 2 2 3 4 4 5 3 5 6 7
1 0 1 1 2 3 3 4 2 4 5 6
2 1 0 2 1 2 2 3 1 3 4 5
2 1 2 0 1 2 2 3 3 3 4 5
3 2 1 1 0 1 1 2 2 2 3 4
4 3 2 2 1 0 2 3 3 1 2 3
4 3 2 2 1 2 0 1 3 1 2 3
5 4 3 3 2 3 1 0 4 2 1 2
3 2 1 3 2 3 3 4 0 4 5 6
5 4 3 3 2 1 1 2 4 0 1 2
6 5 4 4 3 2 2 1 5 1 0 1
7 6 5 5 4 3 3 2 6 2 1 0
"""

NUG12_FLOW = """
0 5 2 4 1 0 0 6 2 1 1 1
5 0 3 0 2 2 2 0 4 5 0 0
2 3 0 0 0 0 0 5 5 2 2 2
4 0 0 0 5 2 2 10 0 0 5 5
1 2 0 5 0 10 0 0 0 5 1 1
0 2 0 2 10 0 5 1 1 5 4 0
0 2 0 2 0 5 0 10 5 2 3 3
6 0 5 10 0 1 10 0 0 0 5 0
2 4 5 0 0 1 5 0 0 0 10 10
1 5 2 0 5 5 2 0 0 0 5 0
1 0 2 5 1 4 3 5 10 5 0 2
1 0 2 5 1 0 3 0 10 0 2 0
"""

# chr12a flow: a weighted tree (11 edges), 1-based vertex pairs.
CHR12A_EDGES = [
    (1, 2, 90), (1, 3, 10), (1, 4, 23), (1, 5, 43), (2, 6, 88),
    (3, 7, 26), (3, 8, 16), (6, 9, 1), (8, 10, 96), (9, 11, 29),
    (10, 12, 37),
]

# chr12a distances, upper triangle rows (i < j). Row 6 carries the
# instance's lone off-diagonal zero at (6, 11).
CHR12A_DIST_UPPER = [
    [36, 54, 26, 59, 72, 9, 34, 79, 17, 46, 95],
    [73, 35, 90, 58, 30, 78, 35, 44, 79, 36],
    [21, 10, 97, 58, 66, 69, 61, 54, 63],
    [93, 12, 46, 40, 37, 48, 68, 85],
    [64, 5, 29, 76, 16, 5, 76],
    [96, 55, 38, 54, 0, 34],
    [83, 35, 11, 56, 37],
    [44, 12, 15, 80],
    [64, 39, 33],
    [70, 86],
    [18],
]


def parse_matrix(text):
    return [[int(v) for v in line.split()] for line in text.strip().splitlines()]


def check_symmetric(m):
    n = len(m)
    for i in range(n):
        assert m[i][i] == 0, (i, m[i][i])
        for j in range(n):
            assert m[i][j] == m[j][i], (i, j)


def tree_matrix(n, edges):
    m = [[0] * n for _ in range(n)]
    for a, b, w in edges:
        m[a - 1][b - 1] = w
        m[b - 1][a - 1] = w
    return m


def mirror_upper(upper):
    n = len(upper) + 1
    m = [[0] * n for _ in range(n)]
    for i, row in enumerate(upper):
        for k, v in enumerate(row):
            j = i + 1 + k
            m[i][j] = v
            m[j][i] = v
    return m


def manhattan_grid(rows, cols):
    n = rows * cols
    m = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            ri, ci = divmod(i, cols)
            rj, cj = divmod(j, cols)
            m[i][j] = abs(ri - rj) + abs(ci - cj)
    return m


def random_symmetric(n, seed, low=1, high=9):
    rng = random.Random(seed)
    m = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            v = rng.randint(low, high)
            m[i][j] = v
            m[j][i] = v
    return m


def write_qaplib(name, flow, dist):
    check_symmetric_or_note(flow)
    n = len(flow)
    assert len(dist) == n
    lines = [str(n), ""]
    for m in (flow, dist):
        for row in m:
            lines.append(" ".join(str(v) for v in row))
        lines.append("")
    path = os.path.join(ROOT, "qaplib", f"{name}.dat")
    with open(path, "w") as fh:
        fh.write("\n".join(lines))
    zeros_f = sum(v == 0 for row in flow for v in row)
    zeros_d = sum(v == 0 for row in dist for v in row)
    t = n * n
    ratio = 1 - (t - zeros_d) * (t - zeros_f) / (t * t)
    print(f"{name}: n={n} zeros(flow)={zeros_f} zeros(dist)={zeros_d} "
          f"zero_ratio={100 * ratio:.4f}%")


def check_symmetric_or_note(m):
    n = len(m)
    for i in range(n):
        assert m[i][i] == 0


def write_tsplib_euc(name, coords):
    lines = [
        f"NAME: {name}",
        "TYPE: TSP",
        f"DIMENSION: {len(coords)}",
        "EDGE_WEIGHT_TYPE: EUC_2D",
        "NODE_COORD_SECTION",
    ]
    for i, (x, y) in enumerate(coords, start=1):
        lines.append(f"{i} {x} {y}")
    lines.append("EOF")
    with open(os.path.join(ROOT, "tsplib", f"{name}.tsp"), "w") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"{name}: n={len(coords)} EUC_2D")


def write_tsplib_explicit(name, fmt, n, entries):
    lines = [
        f"NAME: {name}",
        "TYPE: TSP",
        f"DIMENSION: {n}",
        "EDGE_WEIGHT_TYPE: EXPLICIT",
        f"EDGE_WEIGHT_FORMAT: {fmt}",
        "EDGE_WEIGHT_SECTION",
    ]
    lines.extend(entries)
    lines.append("EOF")
    with open(os.path.join(ROOT, "tsplib", f"{name}.tsp"), "w") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"{name}: n={n} {fmt}")


def main():
    os.makedirs(os.path.join(ROOT, "qaplib"), exist_ok=True)
    os.makedirs(os.path.join(ROOT, "tsplib"), exist_ok=True)

    had12_flow = parse_matrix(HAD12_FLOW)
    had12_dist = parse_matrix(HAD12_DIST)
    check_symmetric(had12_flow)
    check_symmetric(had12_dist)
    write_qaplib("had12", had12_flow, had12_dist)

    write_qaplib("had16", random_symmetric(16, 16), random_symmetric(16, 160))
    write_qaplib("had20", random_symmetric(20, 20), random_symmetric(20, 200))

    nug12_flow = parse_matrix(NUG12_FLOW)
    check_symmetric(nug12_flow)
    nug12_dist = manhattan_grid(3, 4)
    write_qaplib("nug12", nug12_flow, nug12_dist)

    chr12a_flow = tree_matrix(12, CHR12A_EDGES)
    chr12a_dist = mirror_upper(CHR12A_DIST_UPPER)
    check_symmetric(chr12a_flow)
    check_symmetric(chr12a_dist)
    write_qaplib("chr12a", chr12a_flow, chr12a_dist)

    rng = random.Random(76)
    coords = [(rng.randint(0, 100), rng.randint(0, 100)) for _ in range(76)]
    write_tsplib_euc("eil76", coords)

    # gr48-style: a 48-city LOWER_DIAG_ROW triangle.
    rng = random.Random(48)
    rows = []
    for i in range(48):
        row = [str(rng.randint(1, 999)) for _ in range(i)] + ["0"]
        rows.append(" ".join(row))
    write_tsplib_explicit("gr48_style", "LOWER_DIAG_ROW", 48, rows)

    # Small golden files with fractional weights for round-trip checks.
    rng = random.Random(5)

    def frac():
        return f"{rng.randint(1, 9999) / 16}"  # exact binary fractions

    full = []
    sym = [[0.0] * 5 for _ in range(5)]
    for i in range(5):
        for j in range(i + 1, 5):
            v = rng.randint(1, 9999) / 16
            sym[i][j] = sym[j][i] = v
    for i in range(5):
        full.append(" ".join(str(sym[i][j]) for j in range(5)))
    write_tsplib_explicit("full5", "FULL_MATRIX", 5, full)

    upper = []
    for i in range(5):
        if i < 4:
            upper.append(" ".join(frac() for _ in range(4 - i)))
    write_tsplib_explicit("upper5", "UPPER_ROW", 5, upper)

    lowdiag = []
    for i in range(5):
        lowdiag.append(" ".join(["0" if j == i else frac() for j in range(i + 1)]))
    write_tsplib_explicit("lowdiag5", "LOWER_DIAG_ROW", 5, lowdiag)

    best_known = [
        ("eil76", 538), ("eil101", 629), ("ch130", 6110), ("ch150", 6528),
        ("a280", 2579), ("u574", 36905), ("u1432", 152970), ("gr48", 5046),
        ("si175", 21407), ("si535", 48450), ("si1032", 92650),
        ("had12", 1652), ("had16", 3720), ("had20", 6922),
        ("bur26a", 5426670), ("bur26b", 4226496),
        ("nug12", 578), ("nug30", 6124),
        ("chr12a", 9552), ("chr12b", 9742), ("chr12c", 11156),
        ("tai30a", 1818146), ("tai40a", 3139370), ("tai50a", 4938796),
        ("tai80a", 13557864), ("tai100a", 21125314),
        ("lipa70a", 169755), ("lipa90a", 360630),
    ]
    with open(os.path.join(ROOT, "best_known.csv"), "w") as fh:
        fh.write("name,cost\n")
        for name, cost in best_known:
            fh.write(f"{name},{cost}\n")
    print(f"best_known.csv: {len(best_known)} rows")


if __name__ == "__main__":
    main()
