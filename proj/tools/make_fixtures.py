"""Writes the committed SPLX fixtures with an encoder independent of the C++ one."""
import struct
import sys
from pathlib import Path

KIND = {"activation": 1, "gradient": 2}
DTYPE = {"f32": (1, "<f"), "f64": (2, "<d")}


def encode(rows, kind, dtype="f64"):
    code, fmt = DTYPE[dtype]
    n, d = len(rows), len(rows[0])
    head = b"SPLX" + struct.pack("<IBBB", 1, KIND[kind], code, 2) + struct.pack("<QQ", n, d)
    body = b"".join(struct.pack(fmt, x) for r in rows for x in r)
    return head + body


def main(out):
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    # Rows +-2 e_j plus one zero row: N = 9, covariance 2 * 4 / 8 = I exactly.
    rows = []
    for j in range(4):
        e = [0.0] * 4
        e[j] = 2.0
        rows.append(e)
        rows.append([-x for x in e])
    rows.append([0.0] * 4)
    (out / "identity_cov.splx").write_bytes(encode(rows, "activation"))
    (out / "identity_cov.golden.csv").write_text(
        "rank,eigenvalue,normalized\n" + "".join(f"{k},1,0.25\n" for k in range(1, 5)))
    # Rank-one gradient stack u v^T, u = (1, 2, 2), v = (0.6, 0, 0.8, 0): sigma_1 = 3.
    u, v = [1.0, 2.0, 2.0], [0.6, 0.0, 0.8, 0.0]
    (out / "rank1_grad.splx").write_bytes(encode([[a * b for b in v] for a in u], "gradient"))
    # A small full-rank gradient stack for the Gram oracle.
    gram = [[1.0, 2.0, 0.5], [0.0, -1.0, 3.0], [2.5, 0.25, -0.75], [1.5, -2.0, 1.0]]
    (out / "gram_grad.splx").write_bytes(encode(gram, "gradient"))
    (out / "identity_cov_f32.splx").write_bytes(encode(rows, "activation", "f32"))


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "tests/fixtures")
