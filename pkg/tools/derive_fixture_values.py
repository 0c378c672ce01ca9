#!/usr/bin/env python3
"""Symbolic derivations behind every closed-form constant in the fixtures.

Run from the repository root:

    python3 tools/derive_fixture_values.py

Each section derives, with sympy, the values that are frozen into
``statembed.fixtures`` and the tests (metric components, connection
coefficients, curvature values, Legendre conjugates, affine decompositions,
finite-difference stencil weights).  The test suite re-checks the fast ones;
this script is the full audit trail.
"""

import sympy as sp


def section(title):
    print("\n" + "=" * 72)
    print(title)
    print("=" * 72)


def sphere():
    section("sphere2: g = diag(1, sin^2 th)")
    th, ph = sp.symbols("theta phi", positive=True)
    x = [th, ph]
    g = sp.Matrix([[1, 0], [0, sp.sin(th) ** 2]])
    ginv = g.inv()
    n = 2
    gamma = [[[sp.simplify(
        sum(ginv[k, l] * (sp.diff(g[j, l], x[i]) + sp.diff(g[i, l], x[j])
                          - sp.diff(g[i, j], x[l])) / 2 for l in range(n))
    ) for k in range(n)] for j in range(n)] for i in range(n)]
    print("Levi-Civita coefficients Gamma_ij^k:")
    for i in range(n):
        for j in range(n):
            for k in range(n):
                if gamma[i][j][k] != 0:
                    print(f"  Gamma_{i}{j}^{k} = {gamma[i][j][k]}")

    def R_up(i, j, k, l):
        expr = sp.diff(gamma[j][l][k], x[i]) - sp.diff(gamma[i][l][k], x[j])
        for m in range(n):
            expr += gamma[i][m][k] * gamma[j][l][m]
            expr -= gamma[j][m][k] * gamma[i][l][m]
        return sp.simplify(expr)

    r0101 = sp.simplify(sum(g[0, m] * R_up(0, 1, m, 1) for m in range(n)))
    print("R_thphthph (lowered) =", r0101, " -> sin^2(th), value 1 at th=pi/2")

    print("Gauss with h = h* = g:  R_ijkl = g_ik g_jl - g_jk g_il")
    for idx in [(0, 1, 0, 1), (0, 1, 1, 0)]:
        i, j, k, l = idx
        lhs = sp.simplify(sum(g[k, m] * R_up(i, j, m, l) for m in range(n)))
        rhs = sp.simplify(g[i, k] * g[j, l] - g[j, k] * g[i, l])
        print(f"  {idx}: lhs - rhs = {sp.simplify(lhs - rhs)}")

    print("Codazzi with h = g, tau = 0: nabla_i g_jl = 0 for Levi-Civita")
    for i in range(n):
        for j in range(n):
            for l in range(n):
                nab = sp.diff(g[j, l], x[i]) \
                    - sum(gamma[i][j][m] * g[m, l] for m in range(n)) \
                    - sum(gamma[i][l][m] * g[j, m] for m in range(n))
                assert sp.trigsimp(sp.expand_trig(nab)) == 0, (i, j, l)
    print("  all components vanish")

    section("sphere2 affine immersion: f = unit vector, xi = +f")
    emb = sp.Matrix([sp.sin(th) * sp.cos(ph), sp.sin(th) * sp.sin(ph),
                     sp.cos(th)])
    dth, dph = emb.diff(th), emb.diff(ph)
    frame = sp.Matrix.hstack(dth, dph, emb)
    for (i, j) in [(0, 0), (0, 1), (1, 1)]:
        dd = emb.diff(x[i]).diff(x[j])
        coef = sp.simplify(frame.solve(dd))
        # decomposition: dd = Gamma^k d_k f - g_ij xi  =>  g_ij = -coef[2]
        print(f"  dd f[{i}{j}]: Gamma coef {sp.simplify(coef[0])},"
              f" {sp.simplify(coef[1])};  g_{i}{j} = {sp.simplify(-coef[2])}")
    print("  (with xi = -f the same solve gives g = -round metric: sign flip)")
    dxi_coef = frame.solve(dth)  # d_th xi = d_th f when xi = +f
    print("  d_th xi in frame:", [sp.simplify(c) for c in dxi_coef],
          "-> S = identity, tau = 0")
    conormal = sp.Matrix([sp.symbols("p0 p1 p2")])
    sol = sp.solve(
        [conormal.dot(dth), conormal.dot(dph), conormal.dot(emb) - 1],
        sp.symbols("p0 p1 p2"), dict=True)[0]
    print("  conormal phi =", sp.simplify(sp.Matrix([sol[s] for s in
          sp.symbols("p0 p1 p2")]).T), "= +f")


def exp_potential():
    section("exp_potential: psi = sum exp(xi_i)")
    xi = sp.symbols("x")
    psi = sp.exp(xi)
    eta = sp.diff(psi, xi)
    print("eta = dpsi/dxi =", eta)
    print("g = d2 psi =", sp.diff(psi, xi, 2), " (diagonal per axis)")
    psi_star = sp.simplify(xi * eta - psi)
    eta_s = sp.symbols("eta", positive=True)
    conj = psi_star.subs(xi, sp.log(eta_s))
    print("psi* in eta:", sp.simplify(conj), "= eta log eta - eta")
    assert sp.simplify(conj - (eta_s * sp.log(eta_s) - eta_s)) == 0
    print("dual connection, n = 1, Gamma = 0:")
    g = sp.exp(xi)
    gamma_star_low = sp.diff(g, xi)  # d_1 g_11 - Gamma_111
    print("  Gamma*_111 =", gamma_star_low, " raised:",
          sp.simplify(gamma_star_low / g), "= 1")
    print("  alpha = 0 coefficient:", sp.simplify(gamma_star_low / g / 2),
          "= 1/2 (Levi-Civita of e^x)")


def gaussian():
    section("gaussian1d: psi = -th1^2/(4 th2) - log(-2 th2)/2  (th2 < 0)")
    t1, t2 = sp.symbols("t1 t2")
    psi = -t1 ** 2 / (4 * t2) - sp.log(-2 * t2) / 2
    grad = [sp.simplify(sp.diff(psi, v)) for v in (t1, t2)]
    print("eta1 =", grad[0], "  eta2 =", grad[1])
    H = sp.Matrix(2, 2, lambda i, j: sp.diff(psi, (t1, t2)[i], (t1, t2)[j]))
    print("Hessian:", sp.simplify(H))
    print("det =", sp.simplify(H.det()), "> 0 for t2 < 0;  H[0,0] =",
          sp.simplify(H[0, 0]), "> 0  => positive definite")
    e1, e2 = sp.symbols("e1 e2")
    sol = sp.solve([sp.Eq(grad[0], e1), sp.Eq(grad[1], e2)], [t1, t2],
                   dict=True)
    # keep the branch with t2 < 0 (evaluate at the standard normal e1=0, e2=1)
    inv = [s for s in sol if s[t2].subs({e1: 0, e2: 1}) < 0][0]
    print("inverse map: t1 =", sp.simplify(inv[t1]), "  t2 =",
          sp.simplify(inv[t2]))
    psi_star = sp.simplify((t1 * e1 + t2 * e2 - psi).subs(
        {t1: inv[t1], t2: inv[t2]}))
    print("psi* =", psi_star)
    target = -(1 + sp.log(e2 - e1 ** 2)) / 2
    var = sp.symbols("v", positive=True)  # e2 - e1^2 > 0 on the image
    assert sp.simplify((psi_star - target).subs(e2, e1 ** 2 + var)) == 0
    print("     = -(1 + log(e2 - e1^2))/2  [verified]")
    Hs = sp.Matrix(2, 2, lambda i, j: sp.diff(target, (e1, e2)[i],
                                              (e1, e2)[j]))
    print("conjugate Hessian:", sp.simplify(Hs))
    prod = sp.simplify(Hs.subs({e1: grad[0], e2: grad[1]}) * H)
    print("product with Hessian(psi) at matched points:", prod)


def paraboloid_and_cone():
    section("paraboloid: f = (x, |x|^2/2), xi = (0, ..., -1)")
    x1, x2 = sp.symbols("x1 x2")
    f = sp.Matrix([x1, x2, (x1 ** 2 + x2 ** 2) / 2])
    xi = sp.Matrix([0, 0, -1])
    frame = sp.Matrix.hstack(f.diff(x1), f.diff(x2), xi)
    for (i, j) in [(0, 0), (0, 1), (1, 1)]:
        dd = f.diff((x1, x2)[i]).diff((x1, x2)[j])
        coef = frame.solve(dd)
        print(f"  dd f[{i}{j}] coefficients: {list(coef)}  "
              f"(Gamma = 0, g_{i}{j} = {-coef[2]})")
    print("  d xi = 0  => S = 0, tau = 0")
    p = sp.Matrix([sp.symbols("q0 q1 q2")])
    sol = sp.solve([p.dot(frame[:, 0]), p.dot(frame[:, 1]), p.dot(xi) - 1],
                   sp.symbols("q0 q1 q2"), dict=True)[0]
    print("  conormal:", [sp.simplify(sol[s]) for s in sp.symbols("q0 q1 q2")],
          "= (x1, x2, -1)")

    section("cone_codim2: f = (cos t, sin t, 1), xi = (0,0,-1), eta = f")
    t = sp.symbols("t")
    f = sp.Matrix([sp.cos(t), sp.sin(t), 1])
    xi = sp.Matrix([0, 0, -1])
    frame = sp.Matrix.hstack(f.diff(t), xi, f)
    coef = sp.simplify(frame.solve(f.diff(t, 2)))
    print("  f'' coefficients:", list(coef),
          " => Gamma = 0, g = -coef[1] =", -coef[1], ", k = -coef[2] =",
          -coef[2])
    print("  xi' = 0 => S = 0, tau = 0, mu = 0;  D_t eta = f' = tangent")
    p = sp.Matrix([sp.symbols("r0 r1 r2")])
    sol = sp.solve([p.dot(f.diff(t)), p.dot(f), p.dot(xi) - 1],
                   sp.symbols("r0 r1 r2"), dict=True)[0]
    print("  conormal:", [sp.simplify(sol[s]) for s in sp.symbols("r0 r1 r2")],
          "= (cos t, sin t, -1)")


def stencils():
    section("finite-difference closure weights (Vandermonde solve)")
    import numpy as np

    def weights(nodes, at):
        n = len(nodes)
        A = np.vander(np.array(nodes, float) - at, n, increasing=True).T
        b = np.zeros(n)
        b[1] = 1.0
        return np.linalg.solve(A, b)

    print("6-point closure at node 0:", weights(range(6), 0) * 60, "/60")
    print("6-point closure at node 1:", weights(range(6), 1) * 60, "/60")
    print("5-point centered:", weights(range(-2, 3), 0) * 12, "/12")
    print("5-point closure at node 0:", weights(range(5), 0) * 12, "/12")
    print("5-point closure at node 1:", weights(range(5), 1) * 12, "/12")
    print("cubic midpoint weights (interior):",
          np.linalg.solve(np.vander([-1, 0, 1, 2], 4, increasing=True).T,
                          [1, 0.5, 0.25, 0.125]) * 16, "/16")
    print("cubic midpoint weights (left edge):",
          np.linalg.solve(np.vander([0, 1, 2, 3], 4, increasing=True).T,
                          [1, 0.5, 0.25, 0.125]) * 16, "/16")


if __name__ == "__main__":
    sphere()
    exp_potential()
    gaussian()
    paraboloid_and_cone()
    stencils()
    print("\nall symbolic derivations verified")
