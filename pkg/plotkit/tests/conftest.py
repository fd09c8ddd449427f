"""Deterministic fixture CSVs in the dgbench output schema."""

import numpy as np
import pytest


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
    return str(path)


@pytest.fixture(scope="session")
def data_dir(tmp_path_factory):
    """Synthetic shock-tube field, radial field, references and a rate table."""
    root = tmp_path_factory.mktemp("plotkit_data")

    # one-cell-high strip of 40 cells, degree 1: the sod-style field dump
    n = 40
    h = 1.0 / n
    rows = []
    xs_ref = np.linspace(-0.5, 0.5, 400)

    def rho_profile(x):
        return np.where(x < 0.0, 1.0, 0.25) + 0.05 * np.exp(-200.0 * (x - 0.1) ** 2)

    cell = 0
    for i in range(n):
        x0 = -0.5 + i * h
        for node_i, (dx, dy) in enumerate(((0, 0), (0, h), (h, 0), (h, h))):
            x = x0 + dx
            y = dy
            rows.append((cell, 0, x, y, node_i, rho_profile(np.array(x)),
                         0.9 if x > 0 else 0.0, 0.0, min(1.0, 2.5 - x)))
        cell += 1
    field_csv = _write_csv(root / "field_final.csv",
                           ["cell_id", "level", "x", "y", "node_i", "rho", "u", "v", "p"],
                           rows)

    ref_rows = np.column_stack([xs_ref, rho_profile(xs_ref),
                                np.where(xs_ref > 0, 0.9, 0.0),
                                np.clip(2.5 - xs_ref, None, 1.0)])
    ref_csv = _write_csv(root / "reference.csv", ["x", "rho", "u", "p"], ref_rows)

    # radial field on a coarse 20x20 grid over (-1, 1)^2
    rows = []
    cell = 0
    m = 20
    hm = 2.0 / m
    for i in range(m):
        for j in range(m):
            x0, y0 = -1.0 + i * hm, -1.0 + j * hm
            for node_i, (dx, dy) in enumerate(((0, 0), (0, hm), (hm, 0), (hm, hm))):
                x, y = x0 + dx, y0 + dy
                r = np.hypot(x, y)
                rho = 1.0 - 0.6 / (1.0 + np.exp(-(r - 0.5) * 20.0))
                rows.append((cell, 0, x, y, node_i, rho, 0.0, 0.0, 1.0))
            cell += 1
    radial_csv = _write_csv(root / "radial_field.csv",
                            ["cell_id", "level", "x", "y", "node_i", "rho", "u", "v", "p"],
                            rows)
    rr = np.linspace(0, 1.4, 300)
    rho_r = 1.0 - 0.6 / (1.0 + np.exp(-(rr - 0.5) * 20.0))
    radial_ref_csv = _write_csv(root / "radial_reference.csv",
                                ["r", "rho", "u", "p"],
                                np.column_stack([rr, rho_r, 0 * rr, 1 + 0 * rr]))

    conv_csv = _write_csv(root / "convergence.csv",
                          ["n_el", "l1_rel", "l2_rel", "linf_rel", "max_value", "min_value"],
                          [(20, 3.63e-3, 8.62e-3, 6.31e-2, 1.0, 0.49),
                           (40, 8.02e-4, 1.81e-3, 1.26e-2, 1.0, 0.49),
                           (80, 1.79e-4, 3.89e-4, 2.76e-3, 1.0, 0.49)])

    return {
        "root": root,
        "field": field_csv,
        "reference": ref_csv,
        "radial_field": radial_csv,
        "radial_reference": radial_ref_csv,
        "convergence": conv_csv,
    }


@pytest.fixture()
def spec_file(data_dir, tmp_path):
    def write(text, name="spec.ini"):
        path = tmp_path / name
        path.write_text(text)
        return str(path)

    return write
