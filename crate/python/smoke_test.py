"""Smoke test for the michelson_vc extension module."""

from pathlib import Path

import michelson_vc as mvc

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


def read(name):
    return (CORPUS / name).read_text()


def main():
    add = read("add.tz")
    assert "UNPAIR" in mvc.parse(add)
    assert "pair nat nat" in mvc.typecheck(add)
    assert mvc.run(add, "4", "38") == ("success", "Pair {} 42")
    assert mvc.run(read("factorial.tz"), "5", "0", fuel=3)[0] == "fuel"

    try:
        mvc.parse("parameter nat; storage nat; code { ADD ")
    except ValueError:
        pass
    else:
        raise AssertionError("parse error not raised")

    assert "let test" in mvc.vcgen_faithful(add)
    names = mvc.vc_names(read("factorial.tz"), read("factorial.spec"))
    assert "contract:ensures.0" in names

    verdicts = mvc.prove(add, read("add.spec"), jobs=4)
    assert verdicts and all(v["status"] == "valid" for v in verdicts), verdicts
    weak = mvc.prove(read("factorial.tz"), read("factorial_weak.spec"), jobs=4)
    assert any(v["status"] != "valid" for v in weak)
    print(f"ok: {len(names)} factorial VCs, {len(verdicts)} toy verdicts")


if __name__ == "__main__":
    main()
