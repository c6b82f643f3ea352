#!/usr/bin/env python3
"""Expand a quasi-cyclic LDPC base matrix into the sparse row format read by
nrx::link::LdpcCode ("r: c0 c1 ..." per check row).

The bundled base matrix is the n = 648, rate-1/2 code with lifting size 27
(IEEE 802.11n construction); -1 marks an all-zero block, s >= 0 a cyclic
shift of the identity by s."""
import sys

Z = 27
BASE = """
 0 -1 -1 -1  0  0 -1 -1  0 -1 -1  0  1  0 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1
22  0 -1 -1 17 -1  0  0 12 -1 -1 -1 -1  0  0 -1 -1 -1 -1 -1 -1 -1 -1 -1
 6 -1  0 -1 10 -1 -1 -1 24 -1  0 -1 -1 -1  0  0 -1 -1 -1 -1 -1 -1 -1 -1
 2 -1 -1  0 20 -1 -1 -1 25  0 -1 -1 -1 -1 -1  0  0 -1 -1 -1 -1 -1 -1 -1
23 -1 -1 -1  3 -1 -1 -1  0 -1  9 11 -1 -1 -1 -1  0  0 -1 -1 -1 -1 -1 -1
24 -1 23  1 17 -1  3 -1 10 -1 -1 -1 -1 -1 -1 -1 -1  0  0 -1 -1 -1 -1 -1
25 -1 -1 -1  8 -1 -1 -1  7 18 -1 -1  0 -1 -1 -1 -1 -1  0  0 -1 -1 -1 -1
13 24 -1 -1  0 -1  8 -1  6 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1  0  0 -1 -1 -1
 7 20 -1 16 22 10 -1 -1 23 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1  0  0 -1 -1
11 -1 -1 -1 19 -1 -1 -1 13 -1  3 17 -1 -1 -1 -1 -1 -1 -1 -1 -1  0  0 -1
25 -1  8 -1 23 18 -1 14  9 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1  0  0
 3 -1 -1 -1 16 -1 -1  2 25  5 -1 -1  1 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1  0
"""


def main(out):
    rows = [list(map(int, line.split())) for line in BASE.strip().splitlines()]
    mb, nb = len(rows), len(rows[0])
    m, n = mb * Z, nb * Z
    lines = ["# QC-LDPC parity-check matrix, n=%d m=%d, lifting size %d" % (n, m, Z),
             "# format: first data line 'n m'; then one line per check row 'r: c0 c1 ...'",
             "%d %d" % (n, m)]
    for bi, brow in enumerate(rows):
        for z in range(Z):
            cols = []
            for bj, s in enumerate(brow):
                if s < 0:
                    continue
                cols.append(bj * Z + (z + s) % Z)
            lines.append("%d: %s" % (bi * Z + z, " ".join(map(str, sorted(cols)))))
    with open(out, "w") as f:
        f.write("\n".join(lines) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "ldpc_n648_r12.txt")
