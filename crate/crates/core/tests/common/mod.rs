//! Independent reference computations shared by the integration tests.
//! Nothing here calls into the library's quadrature, propagator or path
//! integral code.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Bath response of the Ohmic-exponential density from its Matsubara-type
/// series `coth(x) = 1 + 2 Σ e^{-2nx}`, with an Euler–Maclaurin tail.
pub fn series_correlation(xi: f64, omega_c: f64, beta: f64, t: f64) -> Complex64 {
    let a = 1.0 / omega_c;
    let g = |b: f64| (b * b - t * t) / (b * b + t * t).powi(2);
    let mut re = g(a);
    if beta.is_finite() {
        let terms = 4000;
        let mut sum = 0.0;
        for n in (1..=terms).rev() {
            sum += g(a + n as f64 * beta);
        }
        let edge = a + (terms as f64 + 0.5) * beta;
        sum += edge / (edge * edge + t * t) / beta;
        re += 2.0 * sum;
    }
    let im = -2.0 * a * t / (a * a + t * t).powi(2);
    Complex64::new(0.5 * xi * re, 0.5 * xi * im)
}

/// Composite trapezoid rule for `C(t)` on `[0, 50 ω_c]`.
pub fn trapezoid_correlation(xi: f64, omega_c: f64, beta: f64, t: f64, n: usize) -> Complex64 {
    let upper = 50.0 * omega_c;
    let h = upper / n as f64;
    let f = |w: f64| -> Complex64 {
        // J(ω) coth(βω/2) → π ξ / β as ω → 0
        let j_over_w = std::f64::consts::FRAC_PI_2 * xi * (-w / omega_c).exp();
        let thermal = if w == 0.0 {
            2.0 / beta
        } else {
            w / (0.5 * beta * w).tanh()
        };
        Complex64::new(j_over_w * thermal * (w * t).cos(), -j_over_w * w * (w * t).sin())
    };
    let mut sum = (f(0.0) + f(upper)) * 0.5;
    for k in 1..n {
        sum += f(k as f64 * h);
    }
    sum * h / std::f64::consts::PI
}

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton iteration.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

fn integrate_gl<F: Fn(f64) -> Complex64>(rule: &[(f64, f64)], a: f64, b: f64, f: F) -> Complex64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    rule.iter().map(|&(x, w)| f(mid + half * x) * (w * half)).sum()
}

/// η for one lag by nested 2D Gauss–Legendre quadrature of the series
/// correlation function in the time domain.
pub fn eta_oracle(xi: f64, omega_c: f64, beta: f64, dt: f64, lag: usize) -> Complex64 {
    let rule = gauss_legendre(24);
    let corr = |t: f64| series_correlation(xi, omega_c, beta, t);
    if lag == 0 {
        integrate_gl(&rule, 0.0, dt, |t1| integrate_gl(&rule, 0.0, t1, corr))
    } else {
        let shift = lag as f64 * dt;
        integrate_gl(&rule, 0.0, dt, |t1| {
            integrate_gl(&rule, 0.0, dt, |t2| corr(shift + t1 - t2))
        })
    }
}

/// Fixed-step classical RK4 on `dK/dt = G(t) K`, `K(t0) = I`.
pub fn rk4_propagator<G: Fn(f64) -> DMatrix<Complex64>>(
    generator: G,
    n: usize,
    t0: f64,
    dt: f64,
    substeps: usize,
) -> DMatrix<Complex64> {
    let h = dt / substeps as f64;
    let mut k = DMatrix::<Complex64>::identity(n, n);
    for s in 0..substeps {
        let t = t0 + s as f64 * h;
        let k1 = generator(t) * &k;
        let k2 = generator(t + 0.5 * h) * (&k + &k1 * c(0.5 * h));
        let k3 = generator(t + 0.5 * h) * (&k + &k2 * c(0.5 * h));
        let k4 = generator(t + h) * (&k + &k3 * c(h));
        k += (k1 + k2 * c(2.0) + k3 * c(2.0) + k4) * c(h / 6.0);
    }
    k
}

/// Direct Lindblad right-hand side `-i[H, ρ] + Σ γ (L ρ L† - ½{L†L, ρ})`
/// acting on matrices, tabulated as a row-major superoperator.
pub fn lindblad_generator(h: &DMatrix<Complex64>, jumps: &[(DMatrix<Complex64>, f64)]) -> DMatrix<Complex64> {
    let d = h.nrows();
    let n = d * d;
    let mut g = DMatrix::<Complex64>::zeros(n, n);
    for col in 0..n {
        let mut rho = DMatrix::<Complex64>::zeros(d, d);
        rho[(col / d, col % d)] = c(1.0);
        let mut out = (h * &rho - &rho * h) * Complex64::new(0.0, -1.0);
        for (l, gamma) in jumps {
            let ldl = l.adjoint() * l;
            out += (l * &rho * l.adjoint() - (&ldl * &rho + &rho * &ldl) * c(0.5)) * c(*gamma);
        }
        for i in 0..d {
            for j in 0..d {
                g[(i * d + j, col)] = out[(i, j)];
            }
        }
    }
    g
}

/// Row-major vectorization, written out independently.
pub fn vec_rm(m: &DMatrix<Complex64>) -> DVector<Complex64> {
    let d = m.nrows();
    DVector::from_fn(d * d, |k, _| m[(k / d, k % d)])
}

pub fn unvec_rm(v: &DVector<Complex64>) -> DMatrix<Complex64> {
    let d = (v.len() as f64).sqrt().round() as usize;
    DMatrix::from_fn(d, d, |i, j| v[i * d + j])
}

pub fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Deterministic pseudo-random complex matrix (xorshift).
pub fn pseudo_random_matrix(rows: usize, cols: usize, seed: u64) -> DMatrix<Complex64> {
    let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    };
    DMatrix::from_fn(rows, cols, |_, _| Complex64::new(next(), next()))
}

/// Random density matrix `A A† / Tr(A A†)`.
pub fn pseudo_random_state(d: usize, seed: u64) -> DMatrix<Complex64> {
    let a = pseudo_random_matrix(d, d, seed);
    let rho = &a * a.adjoint();
    let tr = rho.trace();
    rho / tr
}
