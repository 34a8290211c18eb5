"""Smoke test for the archrefit Python bindings.

Build and install first:  pip install --no-build-isolation -e crates/python
Run:                      python python/smoke_test.py
"""

import archrefit


def main():
    model, intended = archrefit.mvc_fixture()
    assert len(model) == 15
    assert len(intended) == 3

    clean = archrefit.reconstruct(model)
    assert (len(clean.architecture), clean.violations) == (3, 0), clean

    again = archrefit.load_model(model.to_json())
    assert again == model

    eroded = archrefit.inject_violations(model, 10, seed=0)
    report = archrefit.check(eroded, intended)
    assert "violations=10" in report

    r = archrefit.reconstruct(eroded, seed=0)
    migration = archrefit.migrate(eroded, r.architecture)
    seq = migration.violation_sequence
    assert all(b <= a for a, b in zip(seq, seq[1:])), seq
    assert migration.ledger_checks == len(migration.transformations)

    rows = archrefit.reconstruction_experiment(seed=0)
    assert len(rows) == 11
    rho = archrefit.spearman([row[0] for row in rows], [row[4] for row in rows])
    assert rho < 0, rho

    small = archrefit.load_model(
        '{"schema_version": 1, "units": [{"name": "A"}, {"name": "B"}]}'
    )
    arch, best = archrefit.exhaustive_oracle(small)
    assert len(arch) == 2 and abs(best - 2 / 3) < 1e-12

    try:
        archrefit.load_model('{"schema_version": 1, "units": [], "extra": 0}')
    except ValueError:
        pass
    else:
        raise AssertionError("unknown fields must be rejected")

    print(r)
    print(migration.table(), end="")
    print("python smoke test passed")


if __name__ == "__main__":
    main()
