"""Independent high-precision oracle for values frozen into the Rust tests.

Integrates the parameter ODEs and the canonical system directly with
mpmath (Taylor-series ODE solver, 30 digits) instead of using any closed
form, then prints the values used as expected results.

    python3 closed_form_oracle.py
"""
import mpmath as mp

mp.mp.dps = 30
I = mp.mpc(0, 1)
J = mp.matrix([[0, 1], [1, 0]])
beta = mp.matrix([[1, I]])
H = beta.H * beta


def canonical_w(x_end, z):
    # W_x = i (z - x)^{-1} J H W, W(0) = I, flattened 4-vector
    def rhs(x, y):
        w = mp.matrix([[y[0], y[1]], [y[2], y[3]]])
        d = (I / (z - x)) * J * H * w
        return [d[0, 0], d[0, 1], d[1, 0], d[1, 1]]

    f = mp.odefun(rhs, 0, [1, 0, 0, 1])
    y = f(x_end)
    return mp.matrix([[y[0], y[1]], [y[2], y[3]]])


def gbdt_n1(b_param, pi0, s0, x_end):
    # Pi_x = -i A Pi J H, S_x = Pi J H J Pi^* - (A S + S A^*), A = (B - x)^{-1}
    def rhs(x, y):
        a = 1 / (b_param - x)
        pi = mp.matrix([[y[0], y[1]]])
        s = y[2]
        dpi = -I * a * pi * J * H
        ds = (pi * J * H * J * pi.H)[0, 0] - (a * s + s * mp.conj(a))
        return [dpi[0, 0], dpi[0, 1], ds]

    f = mp.odefun(rhs, 0, [pi0[0], pi0[1], s0])
    y = f(x_end)
    return mp.matrix([[y[0], y[1]]]), y[2]


def show(name, m):
    if isinstance(m, mp.matrix):
        for i in range(m.rows):
            for j in range(m.cols):
                v = m[i, j]
                print(f"{name}[{i}][{j}] = ({mp.nstr(mp.re(v), 17)}, {mp.nstr(mp.im(v), 17)})")
    else:
        print(f"{name} = ({mp.nstr(mp.re(m), 17)}, {mp.nstr(mp.im(m), 17)})")


# system (5.1) at (x, z) = (1, 2i)
show("W(1,2i)", canonical_w(1, 2 * I))
show("W(0.5,-1+0.5i)", canonical_w(mp.mpf("0.5"), mp.mpc(-1, 0.5)))

# n = 1, B = i, g = 1, h = 0: Pi(0) from the g,h correspondence
b_param = I
g = mp.mpc(1)
h = mp.mpc(0)
c = h + I * g * mp.log(b_param)
pi0 = [c + I * g / 2, g / 2 + I * c]
# S(0) from the scalar identity A S - S A^* = i Pi J Pi^*
a0 = 1 / b_param
pjp = (mp.matrix([pi0]) * J * mp.matrix([pi0]).H)[0, 0]
s0 = I * pjp / (a0 - mp.conj(a0))
show("Pi(0)", mp.matrix([pi0]))
show("S(0)", s0)
x = mp.mpf("0.5")
z = 2 * I
pi_x, s_x = gbdt_n1(b_param, pi0, s0, x)
show("Pi(0.5)", pi_x)
show("S(0.5)", s_x)
ainv = b_param - x
w0 = mp.eye(2) - I * J * pi_x.H * (1 / s_x) * ainv * pi_x
res = (x - z) * (b_param - x) / (b_param - z)
wa = mp.eye(2) - I * J * pi_x.H * (1 / s_x) * res * pi_x
v = mp.inverse(w0) * wa
show("w0(0.5)", w0)
show("wA(0.5,2i)", wa)
show("v(0.5,2i)", v)
show("beta_tilde(0.5)", beta * w0)
