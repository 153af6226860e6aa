"""Build a small simplicial complex, look at its incidence matrices and the
spectra of its Hodge Laplacians and Dirac operator."""
import numpy as np

from topostat import (SimplicialComplex, Subspace, build_incidence, dirac, eigendecompose,
                      hodge_laplacian, hodge_project, random_complex)

if __name__ == "__main__":
    # a filled triangle with a hollow square attached: one 1-dimensional hole
    c = SimplicialComplex.from_simplices([(0, 1, 2), (1, 3), (3, 4), (2, 4)])
    print(c)
    print("B_1 =\n", build_incidence(c, 1).toarray())
    print("B_2 =\n", build_incidence(c, 2).toarray())
    print("B_1 B_2 =", (build_incidence(c, 1) @ build_incidence(c, 2)).toarray().ravel())

    basis = eigendecompose(hodge_laplacian(c, 1))
    print("edge frequencies:", np.round(basis.eigenvalues, 3))
    print("labels:", [lab.value for lab in basis.labels])

    # split an arbitrary edge flow into its three parts
    s = np.arange(1.0, c.counts[1] + 1)
    grad, curl, harm = hodge_project(basis, s)
    for name, part in zip(("gradient", "curl", "harmonic"), (grad, curl, harm)):
        print(f"{name:9s}", np.round(part, 3))
    print("harmonic dimension:", len(basis.indices(Subspace.HARMONIC)))

    # the Dirac operator couples all orders; its square is block diagonal
    D = dirac(c).matrix
    off = c.offsets
    D2 = D @ D
    for k in range(c.order + 1):
        blk = D2[off[k]:off[k + 1], off[k]:off[k + 1]]
        print(f"block {k} equals L_{k}:", np.allclose(blk, hodge_laplacian(c, k).matrix))

    big = random_complex(50, 0.2, 0.3, seed=7)
    lam = eigendecompose(dirac(big)).eigenvalues
    print(big, "Dirac spectrum range", lam.min().round(3), lam.max().round(3))
