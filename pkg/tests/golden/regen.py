"""Rebuild the golden inputs and outputs: python3 tests/golden/regen.py

Review the diff before committing; the golden files are the CLI contract.
"""
import io
import sys
from pathlib import Path

HERE = Path(__file__).resolve().parent
sys.path.insert(0, str(HERE.parent))

from gradedll.cli import Document, format_document, main  # noqa: E402
from gradedll.grading import NAT  # noqa: E402
import fixtures as fx  # noqa: E402
from test_relmodel import non_unique_split_cut  # noqa: E402
from cases import CASES, INPUTS  # noqa: E402


def docs():
    from cases import slug

    rewrites = {slug(f.name): Document("DBSLL", NAT, f.build()) for f in fx.FIXTURES}
    return {
        **rewrites,
        "ax": Document("DBSLL", NAT, fx.DB.ax(fx.A)),
        "weakened": Document("DBSLL", NAT, fx.weakened(1), "atoms.txt"),
        "c_coc": Document("DBSLL", NAT, fx.c_coc()),
        "di_contraction": Document("DBSLL", NAT, fx.di_contraction()),
        "non_unique_split": Document("DBSLL", NAT, non_unique_split_cut()),
        "d_cod": Document("DBSLL", NAT, fx.d_cod()),
        "prom_w": Document("DBSLL+promotion", NAT, fx.prom_w(__import__("random").Random(2))),
        "lp_wi_cowi": Document("IDiLL", fx.LP, fx.lp_wi_cowi()),
        "lp_c_coc": Document("IDiLL", fx.LP, fx.lp_c_coc()),
    }


if __name__ == "__main__":
    for name, doc in docs().items():
        assert name in INPUTS
        (HERE / f"{name}.gdl").write_text(format_document(doc), encoding="utf-8")
    (HERE / "atoms.txt").write_text("a: p q\n", encoding="utf-8")
    for name, argv, code in CASES:
        out, err = io.StringIO(), io.StringIO()
        got = main([a.replace("@", str(HERE) + "/") for a in argv], out=out, err=err)
        assert got == code, (name, got, err.getvalue())
        (HERE / f"{name}.out").write_text(out.getvalue(), encoding="utf-8")
        print(name, got)
