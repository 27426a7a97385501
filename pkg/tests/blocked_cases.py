"""Random block-angular update instances shared by the blocked tests."""

import numpy as np

from sparsela.blockpar import bch, bup, random_block_angular


def update_instance(rng, case, dbmax_max=16):
    """Draw an instance and an update of the requested case; returns
    (A, U, a, ink, outk, outj) with U the blocked factor of A."""
    while True:
        h = int(rng.integers(2 if case == "I" else 1, 5))
        A = random_block_angular(rng, h, int(rng.integers(3, dbmax_max + 1)))
        ks = list(range(1, h + 1))
        if case == "I":
            ink, outk = (int(k) for k in rng.choice(ks, 2, replace=False))
        elif case == "II":
            ink = outk = int(rng.choice(ks))
        elif case == "III":
            ink, outk = int(rng.choice(ks)), h + 1
        elif case == "IV":
            ink, outk = h + 1, int(rng.choice(ks))
        else:
            ink = outk = h + 1
        ncol = A.nk(outk - 1) if outk <= h else A.n0
        if ncol < 2:
            continue
        outj = int(rng.integers(1, ncol + 1))
        rows = A.m(ink - 1) if ink <= h else int(A.row_offsets()[-1])
        U, _ = bch(A)
        return A, U, rng.standard_normal(rows), ink, outk, outj


def run_update(rng, case):
    A, U, a, ink, outk, outj = update_instance(rng, case)
    got, ledger = bup(A, U, a, ink, outk, outj)
    return A, U, got, ledger
