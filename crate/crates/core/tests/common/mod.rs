//! Reference computations that share no code with the library: plain
//! arrays, explicit index loops and closed-form trigonometry.
#![allow(clippy::needless_range_loop, dead_code)]

pub type Cx = (f64, f64);

fn cmul(a: Cx, b: Cx) -> Cx {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

fn conj(a: Cx) -> Cx {
    (a.0, -a.1)
}

/// `|ψ⟩⟨ψ|` with `ψ[a][b]` the amplitude of Alice in `a`, Bob in `b`.
pub fn pure_two_qubit(psi: [[Cx; 2]; 2]) -> [[[[Cx; 2]; 2]; 2]; 2] {
    let mut rho = [[[[(0.0, 0.0); 2]; 2]; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            for a2 in 0..2 {
                for b2 in 0..2 {
                    rho[a][b][a2][b2] = cmul(psi[a][b], conj(psi[a2][b2]));
                }
            }
        }
    }
    rho
}

/// `ρ[a][b][a'][b']` contracted over Alice's indices (`a = a'`).
pub fn trace_out_alice(rho: &[[[[Cx; 2]; 2]; 2]; 2]) -> [[Cx; 2]; 2] {
    let mut out = [[(0.0, 0.0); 2]; 2];
    for b in 0..2 {
        for b2 in 0..2 {
            for a in 0..2 {
                out[b][b2].0 += rho[a][b][a][b2].0;
                out[b][b2].1 += rho[a][b][a][b2].1;
            }
        }
    }
    out
}

pub fn phi_plus_tensor() -> [[Cx; 2]; 2] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [[(s, 0.0), (0.0, 0.0)], [(0.0, 0.0), (s, 0.0)]]
}

/// `|⟨u ⊗ v|ψ⟩|²` for real linear polarizations at angles `ta`, `tb`.
pub fn linear_pair_probability(psi: [[Cx; 2]; 2], ta: f64, tb: f64) -> f64 {
    let u = [ta.cos(), ta.sin()];
    let v = [tb.cos(), tb.sin()];
    let mut amp = (0.0, 0.0);
    for a in 0..2 {
        for b in 0..2 {
            amp.0 += u[a] * v[b] * psi[a][b].0;
            amp.1 += u[a] * v[b] * psi[a][b].1;
        }
    }
    amp.0 * amp.0 + amp.1 * amp.1
}

/// Photon at linear angle `alpha` through the cascade of `n` beamsplitters
/// at `omega`, stage by stage. Returns `(P(first), leaks, P(last))`.
pub fn cascade_by_stages(n: usize, omega: f64, alpha: f64) -> (f64, Vec<f64>, f64) {
    let m = n - 1;
    let delta = std::f64::consts::FRAC_PI_2 / m as f64;
    let project = |v: [f64; 2], t: f64| {
        let (c, s) = (t.cos(), t.sin());
        let amp = v[0] * c + v[1] * s;
        (amp, [amp * c, amp * s])
    };
    let input = [alpha.cos(), alpha.sin()];
    let (first_amp, _) = project(input, omega);
    let (_, mut beam) = project(input, omega + std::f64::consts::FRAC_PI_2);
    let mut leaks = Vec::with_capacity(m);
    for k in 1..=m {
        let axis = omega + std::f64::consts::FRAC_PI_2 - k as f64 * delta;
        let (leak_amp, _) = project(beam, axis + std::f64::consts::FRAC_PI_2);
        leaks.push(leak_amp * leak_amp);
        beam = project(beam, axis).1;
    }
    (
        first_amp * first_amp,
        leaks,
        beam[0] * beam[0] + beam[1] * beam[1],
    )
}

/// Eigenvalues of a real symmetric 2×2 matrix by the quadratic formula.
pub fn sym2_eigenvalues(a: f64, b: f64, d: f64) -> (f64, f64) {
    let tr = a + d;
    let det = a * d - b * b;
    let disc = (tr * tr / 4.0 - det).sqrt();
    (tr / 2.0 - disc, tr / 2.0 + disc)
}

/// Frozen from an independent double-precision evaluation of
/// `cos^200(π/200)`: survival probability of the worst-case input through
/// the 101-splitter cascade.
pub const SURVIVAL_N101: f64 = 0.9756269141438981;

/// Frozen `1 − cos^(2m)(π/(2m))` for n = 2, 3, 11, 101, 1001.
pub const WORST_LEAKS: [(usize, f64); 5] = [
    (2, 1.0),
    (3, 0.75),
    (11, 0.21945393021885917),
    (101, 0.024373085856101873),
    (1001, 0.0024643605804500757),
];
