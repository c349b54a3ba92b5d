//! Manufactured solutions and their forcing terms.
//!
//! The loads are fixed across all experiments: the elasticity forcing is
//! derived with unit Lamé parameters and the curl-curl forcing with unit
//! coefficients, independently of the coefficient field the system matrix is
//! assembled with.

/// Which manufactured problem drives the right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Manufactured {
    /// Zero forcing (for tests).
    Zero,
    /// The polynomial elasticity solution u_c = x(x-1)y(y-1)z(z-1), c = 1..3.
    ElasticityPoly,
    /// The mixed polynomial/trigonometric/exponential curl-curl solution.
    MaxwellMixed,
}

impl Manufactured {
    /// Parses the external name ("elasticity-poly", "maxwell-mixed", "zero").
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "zero" => Some(Manufactured::Zero),
            "elasticity-poly" => Some(Manufactured::ElasticityPoly),
            "maxwell-mixed" => Some(Manufactured::MaxwellMixed),
            _ => None,
        }
    }
}

#[inline]
fn p(t: f64) -> f64 {
    t * (t - 1.0)
}
#[inline]
fn dp(t: f64) -> f64 {
    2.0 * t - 1.0
}
const DDP: f64 = 2.0;

#[inline]
fn s(t: f64) -> f64 {
    (std::f64::consts::PI * t).sin()
}
#[inline]
fn ds(t: f64) -> f64 {
    std::f64::consts::PI * (std::f64::consts::PI * t).cos()
}
#[inline]
fn dds(t: f64) -> f64 {
    -std::f64::consts::PI * std::f64::consts::PI * (std::f64::consts::PI * t).sin()
}

#[inline]
fn ee(t: f64) -> f64 {
    (1.0 - t.exp()) * (1.0 - (t - 1.0).exp())
}
#[inline]
fn dee(t: f64) -> f64 {
    -t.exp() - (t - 1.0).exp() + 2.0 * (2.0 * t - 1.0).exp()
}
#[inline]
fn ddee(t: f64) -> f64 {
    -t.exp() - (t - 1.0).exp() + 4.0 * (2.0 * t - 1.0).exp()
}

/// Exact displacement of the elasticity problem.
pub fn elasticity_exact(x: [f64; 3]) -> [f64; 3] {
    let v = p(x[0]) * p(x[1]) * p(x[2]);
    [v, v, v]
}

/// Forcing `f = -div σ(u)` of the elasticity problem with λ = μ = 1:
/// `f_i = -(Δu_i + 2 ∂_i div u)`.
pub fn elasticity_forcing(x: [f64; 3]) -> [f64; 3] {
    let (px, py, pz) = (p(x[0]), p(x[1]), p(x[2]));
    let (dx, dy, dz) = (dp(x[0]), dp(x[1]), dp(x[2]));
    let lap = DDP * py * pz + px * DDP * pz + px * py * DDP;
    let ddiv = [
        DDP * py * pz + dx * dy * pz + dx * py * dz,
        dx * dy * pz + px * DDP * pz + px * dy * dz,
        dx * py * dz + px * dy * dz + px * py * DDP,
    ];
    [
        -(lap + 2.0 * ddiv[0]),
        -(lap + 2.0 * ddiv[1]),
        -(lap + 2.0 * ddiv[2]),
    ]
}

/// Exact field of the curl-curl problem.
pub fn maxwell_exact(x: [f64; 3]) -> [f64; 3] {
    [
        p(x[0]) * p(x[1]) * p(x[2]),
        s(x[0]) * s(x[1]) * s(x[2]),
        ee(x[0]) * ee(x[1]) * ee(x[2]),
    ]
}

/// Forcing `f = curl(curl u) + u` of the curl-curl problem with α = β = 1,
/// using `curl curl u = ∇(div u) − Δu`.
pub fn maxwell_forcing(x: [f64; 3]) -> [f64; 3] {
    let (px, py, pz) = (p(x[0]), p(x[1]), p(x[2]));
    let (dpx, dpy, dpz) = (dp(x[0]), dp(x[1]), dp(x[2]));
    let (sx, sy, sz) = (s(x[0]), s(x[1]), s(x[2]));
    let (dsx, dsy, dsz) = (ds(x[0]), ds(x[1]), ds(x[2]));
    let (ex, ey, ez) = (ee(x[0]), ee(x[1]), ee(x[2]));
    let (dex, dey, dez) = (dee(x[0]), dee(x[1]), dee(x[2]));

    let grad_div = [
        DDP * py * pz + dsx * dsy * sz + dex * ey * dez,
        dpx * dpy * pz + sx * dds(x[1]) * sz + ex * dey * dez,
        dpx * py * dpz + sx * dsy * dsz + ex * ey * ddee(x[2]),
    ];
    let lap = [
        DDP * py * pz + px * DDP * pz + px * py * DDP,
        dds(x[0]) * sy * sz + sx * dds(x[1]) * sz + sx * sy * dds(x[2]),
        ddee(x[0]) * ey * ez + ex * ddee(x[1]) * ez + ex * ey * ddee(x[2]),
    ];
    let u = maxwell_exact(x);
    [
        grad_div[0] - lap[0] + u[0],
        grad_div[1] - lap[1] + u[1],
        grad_div[2] - lap[2] + u[2],
    ]
}

/// Forcing of the selected problem.
pub fn forcing(which: Manufactured, x: [f64; 3]) -> [f64; 3] {
    match which {
        Manufactured::Zero => [0.0; 3],
        Manufactured::ElasticityPoly => elasticity_forcing(x),
        Manufactured::MaxwellMixed => maxwell_forcing(x),
    }
}

/// Exact solution of the selected problem (zero for `Zero`).
pub fn exact(which: Manufactured, x: [f64; 3]) -> [f64; 3] {
    match which {
        Manufactured::Zero => [0.0; 3],
        Manufactured::ElasticityPoly => elasticity_exact(x),
        Manufactured::MaxwellMixed => maxwell_exact(x),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;

    const STEP: f64 = 1e-4;
    const TOL: f64 = 1e-6;

    fn second_derivative(f: impl Fn([f64; 3]) -> [f64; 3], x: [f64; 3], comp: usize, a: usize) -> f64 {
        let mut xp = x;
        let mut xm = x;
        xp[a] += STEP;
        xm[a] -= STEP;
        (f(xp)[comp] - 2.0 * f(x)[comp] + f(xm)[comp]) / (STEP * STEP)
    }

    fn mixed_derivative(
        f: impl Fn([f64; 3]) -> [f64; 3],
        x: [f64; 3],
        comp: usize,
        a: usize,
        b: usize,
    ) -> f64 {
        let mut xpp = x;
        let mut xpm = x;
        let mut xmp = x;
        let mut xmm = x;
        xpp[a] += STEP;
        xpp[b] += STEP;
        xpm[a] += STEP;
        xpm[b] -= STEP;
        xmp[a] -= STEP;
        xmp[b] += STEP;
        xmm[a] -= STEP;
        xmm[b] -= STEP;
        (f(xpp)[comp] - f(xpm)[comp] - f(xmp)[comp] + f(xmm)[comp]) / (4.0 * STEP * STEP)
    }

    /// ∂_i div u by finite differences.
    fn fd_grad_div(f: impl Fn([f64; 3]) -> [f64; 3] + Copy, x: [f64; 3], i: usize) -> f64 {
        (0..3)
            .map(|j| {
                if i == j {
                    second_derivative(f, x, j, i)
                } else {
                    mixed_derivative(f, x, j, i, j)
                }
            })
            .sum()
    }

    fn fd_laplacian(f: impl Fn([f64; 3]) -> [f64; 3] + Copy, x: [f64; 3], comp: usize) -> f64 {
        (0..3).map(|a| second_derivative(f, x, comp, a)).sum()
    }

    #[test]
    fn elasticity_forcing_matches_strong_operator() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let x = [rng.gen_range(0.1..0.9), rng.gen_range(0.1..0.9), rng.gen_range(0.1..0.9)];
            let f = elasticity_forcing(x);
            for i in 0..3 {
                let fd = -(fd_laplacian(elasticity_exact, x, i)
                    + 2.0 * fd_grad_div(elasticity_exact, x, i));
                assert!(
                    (f[i] - fd).abs() <= TOL * (1.0 + fd.abs()),
                    "component {i} at {x:?}: closed {} vs fd {fd}",
                    f[i]
                );
            }
        }
    }

    #[test]
    fn maxwell_forcing_matches_strong_operator() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let x = [rng.gen_range(0.1..0.9), rng.gen_range(0.1..0.9), rng.gen_range(0.1..0.9)];
            let f = maxwell_forcing(x);
            let u = maxwell_exact(x);
            for i in 0..3 {
                let fd = fd_grad_div(maxwell_exact, x, i) - fd_laplacian(maxwell_exact, x, i) + u[i];
                assert!(
                    (f[i] - fd).abs() <= TOL * (1.0 + fd.abs()),
                    "component {i} at {x:?}: closed {} vs fd {fd}",
                    f[i]
                );
            }
        }
    }

    #[test]
    fn boundary_compatibility() {
        // elasticity: u = 0 on ∂Ω; curl-curl: tangential components vanish.
        for &t in &[0.0, 1.0] {
            let u = elasticity_exact([t, 0.3, 0.7]);
            assert!(u.iter().all(|&v| v == 0.0));
            let m = maxwell_exact([t, 0.3, 0.7]); // face x = t: tangential are comps 1, 2
            assert!(m[1].abs() < 1e-15 && m[2].abs() < 1e-15);
            let m = maxwell_exact([0.3, t, 0.7]);
            assert!(m[0].abs() < 1e-15 && m[2].abs() < 1e-15);
            let m = maxwell_exact([0.3, 0.7, t]);
            assert!(m[0].abs() < 1e-15 && m[1].abs() < 1e-15);
        }
    }
}
