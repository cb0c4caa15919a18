"""Reference values for the order-2 showcase pipeline (rational funnel,
algebraic psi), computed symbolically with sympy and integrated with mpmath.

Prints, per state: z1, z2, alpha1, d alpha1/d x1, |W_2|_F^2, |Omega_bar|^2,
kappa and the entries of W (rows: coordinates z1, z2; columns: w2, Omega).
The C++ tests freeze these numbers.
"""
import mpmath as mp
import sympy as sp

mp.mp.dps = 30

k1 = k2 = sp.Rational(1, 10)
gamma = sp.Rational(1, 10)
delta = sp.Integer(1)
eps_psi = eps_omega = sp.Integer(1)
n = 2

x1, x2, th, b0, b1, b2 = sp.symbols("x1 x2 th b0 b1 b2", real=True)
z1s, z2s = sp.symbols("z1 z2", real=True)


def psi(x):
    return x / sp.sqrt(1 + x**2)


def alpha1_of(x, th_, b0_, b1_):
    p = psi(x)
    dp = (1 + x**2) ** sp.Rational(-3, 2)
    px = 1 / sp.sqrt(1 + x**2)
    gap = b0_**2 - p**2
    z = b0_ * p / gap
    Pi = b0_ * dp * (b0_**2 + p**2) / gap**2
    Psix = -b1_ * px * (b0_**2 + p**2) / gap**2
    W1 = gap / (b0_ * px)
    zeta = sp.Rational(1, 2) * (1 / eps_psi + delta * Pi * W1**2 + Pi * delta + (n - 1) * delta)
    alpha = -(k1 + zeta) * z / Pi - Psix / Pi * x - x * th_
    return alpha, z, Pi


alpha1, z1_of_x, Pi_of_x = alpha1_of(x1, th, b0, b1)
da_dx1 = sp.diff(alpha1, x1)
da_dth = sp.diff(alpha1, th)
da_db0 = sp.diff(alpha1, b0)
da_db1 = sp.diff(alpha1, b1)


def final_terms(X1, X2):
    sub = {x1: X1}
    z1v = z1_of_x.subs(sub)
    z2v = X2 - alpha1.subs(sub)
    w2 = -da_dx1.subs(sub) * X1  # phi2 = 0, phi1 = x1
    tau1 = gamma * z1v * Pi_of_x.subs(sub) * X1
    tau2 = tau1 + gamma * w2 * z2v
    omega = (Pi_of_x.subs(sub) * z1v + w2 * th - da_dth.subs(sub) * tau2 - da_dx1.subs(sub) * X2
             - da_db0.subs(sub) * b1 - da_db1.subs(sub) * b2)
    return z1v, z2v, w2, omega


# f as a function of the transformed coordinates
ps = 2 * b0 * z1s / (1 + sp.sqrt(1 + 4 * z1s**2))
X1z = ps / sp.sqrt(1 - ps**2)
X2z = z2s + alpha1.subs(x1, X1z)
_, _, w2z, omz = final_terms(X1z, X2z)
J = [[sp.diff(f, v) for f in (w2z, omz)] for v in (z1s, z2s)]  # J[c][r]

states = [
    # x1, x2, theta_hat, t
    (1.0, -1.0, 0.0, 0.0),
    (0.3, 0.2, 1.5, 1.0),
    (-0.2, 0.5, 2.5, 2.5),
    (0.05, -0.1, 3.0, 6.0),
]

for X1v, X2v, thv, tv in states:
    t = mp.mpf(tv)
    e = mp.e ** (-mp.mpf("0.4") * t)
    bv = {b0: mp.mpf("0.9") * e + mp.mpf("0.1"), b1: -mp.mpf("0.36") * e, b2: mp.mpf("0.144") * e}
    env = {th: mp.mpf(thv), **bv}
    z1v, z2v, w2v, omv = [sp.N(q.subs(env), 30) for q in final_terms(sp.Float(X1v, 30), sp.Float(X2v, 30))]
    a1 = sp.N(alpha1.subs({x1: sp.Float(X1v, 30), **env}), 30)
    d1 = sp.N(da_dx1.subs({x1: sp.Float(X1v, 30), **env}), 30)
    Wm = [[None, None], [None, None]]
    for c in range(2):
        for r in range(2):
            g = sp.lambdify((z1s, z2s), J[c][r].subs(env), "mpmath")
            Wm[c][r] = mp.quad(lambda s: g(s * mp.mpf(z1v), s * mp.mpf(z2v)), [0, 1])
    wf2 = Wm[0][0] ** 2 + Wm[1][0] ** 2
    ob2 = Wm[0][1] ** 2 + Wm[1][1] ** 2
    kappa = mp.mpf(k2) + (wf2 + 1 + 1 + ob2) / 2
    res = [mp.mpf(z1v) * Wm[0][r] + mp.mpf(z2v) * Wm[1][r] - (mp.mpf(w2v) if r == 0 else mp.mpf(omv)) for r in range(2)]
    print(f"{{{X1v}, {X2v}, {thv}, {tv}, {mp.nstr(mp.mpf(z1v), 17)}, {mp.nstr(mp.mpf(z2v), 17)}, "
          f"{mp.nstr(mp.mpf(a1), 17)}, {mp.nstr(mp.mpf(d1), 17)}, {mp.nstr(wf2, 17)}, {mp.nstr(ob2, 17)}, "
          f"{mp.nstr(kappa, 17)}, {mp.nstr(mp.mpf(w2v), 17)}, {mp.nstr(mp.mpf(omv), 17)}}},  "
          f"// identity residual {mp.nstr(max(abs(v) for v in res), 3)}")
