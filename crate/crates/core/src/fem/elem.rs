//! Dense element matrices on axis-aligned cubic cells.
//!
//! Local orderings (cell of side `h`, lower corner at the origin):
//!
//! * nodes: `l = dx + 2·dy + 4·dz`, dofs `3·l + comp`;
//! * edges: x-edges `dy + 2·dz` (0..4), y-edges `4 + dx + 2·dz`,
//!   z-edges `8 + dx + 2·dy`, all oriented along the positive axis.

use crate::error::Error;

/// 2-point Gauss rule on [0,1] (exact through cubic polynomials).
pub const GAUSS2: [(f64, f64); 2] = [
    (0.5 - 0.288_675_134_594_812_9, 0.5),
    (0.5 + 0.288_675_134_594_812_9, 0.5),
];

/// 3-point Gauss rule on [0,1] (exact through quintic polynomials).
pub const GAUSS3: [(f64, f64); 3] = [
    (0.5 - 0.387_298_334_620_741_7, 5.0 / 18.0),
    (0.5, 8.0 / 18.0),
    (0.5 + 0.387_298_334_620_741_7, 5.0 / 18.0),
];

#[inline]
fn shape1(d: usize, t: f64) -> f64 {
    if d == 0 {
        1.0 - t
    } else {
        t
    }
}

#[inline]
fn dshape1(d: usize) -> f64 {
    if d == 0 {
        -1.0
    } else {
        1.0
    }
}

/// Trilinear scalar shape function of local node `l` at reference point `t`.
#[inline]
pub fn hex_shape(l: usize, t: [f64; 3]) -> f64 {
    let (dx, dy, dz) = (l & 1, (l >> 1) & 1, (l >> 2) & 1);
    shape1(dx, t[0]) * shape1(dy, t[1]) * shape1(dz, t[2])
}

/// Physical gradient of the trilinear shape function on a cell of side `h`.
#[inline]
pub fn hex_shape_grad(l: usize, t: [f64; 3], h: f64) -> [f64; 3] {
    let (dx, dy, dz) = (l & 1, (l >> 1) & 1, (l >> 2) & 1);
    let sx = shape1(dx, t[0]);
    let sy = shape1(dy, t[1]);
    let sz = shape1(dz, t[2]);
    [
        dshape1(dx) * sy * sz / h,
        sx * dshape1(dy) * sz / h,
        sx * sy * dshape1(dz) / h,
    ]
}

/// Lowest-order Nédélec edge basis function (moment-normalized) of local edge
/// `e` at reference point `t`, on a cell of side `h`.
#[inline]
pub fn nedelec_shape(e: usize, t: [f64; 3], h: f64) -> [f64; 3] {
    let mut v = [0.0; 3];
    let (axis, a, b) = edge_decompose(e);
    let (t1, t2) = transverse_axes(axis);
    v[axis] = shape1(a, t[t1]) * shape1(b, t[t2]) / h;
    v
}

/// Curl of the Nédélec basis function, constant-free form evaluated at `t`.
#[inline]
pub fn nedelec_curl(e: usize, t: [f64; 3], h: f64) -> [f64; 3] {
    let (axis, a, b) = edge_decompose(e);
    let (t1, t2) = transverse_axes(axis);
    // field = f(t1, t2) along `axis` with f = ψ_a(t1) ψ_b(t2) / h;
    // physical derivatives carry another 1/h.
    let df_d1 = dshape1(a) * shape1(b, t[t2]) / (h * h);
    let df_d2 = shape1(a, t[t1]) * dshape1(b) / (h * h);
    // curl(f e_axis) = ∇f × e_axis
    let mut grad = [0.0; 3];
    grad[t1] = df_d1;
    grad[t2] = df_d2;
    cross(grad, unit(axis))
}

#[inline]
fn unit(axis: usize) -> [f64; 3] {
    let mut u = [0.0; 3];
    u[axis] = 1.0;
    u
}

#[inline]
fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Splits a local edge index into (axis, first transverse offset, second).
#[inline]
pub fn edge_decompose(e: usize) -> (usize, usize, usize) {
    let axis = e / 4;
    let r = e % 4;
    (axis, r & 1, (r >> 1) & 1)
}

/// The two transverse axes of an edge direction, in fixed (cyclic-free) order.
#[inline]
pub fn transverse_axes(axis: usize) -> (usize, usize) {
    match axis {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

/// 24×24 stiffness matrix of the trilinear vector element for the elasticity
/// form `2μ ε(u):ε(v) + λ div u · div v` on a cube of side `h`.
///
/// Symmetric positive semidefinite with the six rigid-body modes as kernel.
pub fn elasticity_element_matrix(lambda: f64, mu: f64, h: f64) -> Result<[[f64; 24]; 24], Error> {
    if !(lambda > 0.0) || !(mu > 0.0) {
        return Err(Error::Coefficient(format!(
            "Lamé parameters must be positive, got λ={lambda}, μ={mu}"
        )));
    }
    Ok(elasticity_element_matrix_unchecked(lambda, mu, h))
}

pub(crate) fn elasticity_element_matrix_unchecked(lambda: f64, mu: f64, h: f64) -> [[f64; 24]; 24] {
    let mut k = [[0.0f64; 24]; 24];
    let vol = h * h * h;
    for &(gx, wx) in GAUSS2.iter() {
        for &(gy, wy) in GAUSS2.iter() {
            for &(gz, wz) in GAUSS2.iter() {
                let w = wx * wy * wz * vol;
                let t = [gx, gy, gz];
                let mut grad = [[0.0f64; 3]; 8];
                for (l, g) in grad.iter_mut().enumerate() {
                    *g = hex_shape_grad(l, t, h);
                }
                // strain rows: exx eyy ezz gxy gyz gzx
                let mut b = [[0.0f64; 24]; 6];
                for l in 0..8 {
                    let g = grad[l];
                    let c = 3 * l;
                    b[0][c] = g[0];
                    b[1][c + 1] = g[1];
                    b[2][c + 2] = g[2];
                    b[3][c] = g[1];
                    b[3][c + 1] = g[0];
                    b[4][c + 1] = g[2];
                    b[4][c + 2] = g[1];
                    b[5][c] = g[2];
                    b[5][c + 2] = g[0];
                }
                // D: λ on the 3x3 normal block, +2μ on its diagonal, μ on shears
                for i in 0..24 {
                    for j in i..24 {
                        let mut normal_i = 0.0;
                        let mut normal_j = 0.0;
                        let mut diag = 0.0;
                        for r in 0..3 {
                            normal_i += b[r][i];
                            normal_j += b[r][j];
                            diag += b[r][i] * b[r][j];
                        }
                        let mut shear = 0.0;
                        for r in 3..6 {
                            shear += b[r][i] * b[r][j];
                        }
                        let v = w * (lambda * normal_i * normal_j + 2.0 * mu * diag + mu * shear);
                        k[i][j] += v;
                        if i != j {
                            k[j][i] += v;
                        }
                    }
                }
            }
        }
    }
    k
}

/// 12×12 matrix of the lowest-order Nédélec element for the curl-curl form
/// `α curl u · curl v + β u · v` on a cube of side `h`.
///
/// Zero coefficients are accepted so the curl part and the mass part can be
/// probed in isolation; negative values are rejected.
pub fn maxwell_element_matrix(alpha: f64, beta: f64, h: f64) -> Result<[[f64; 12]; 12], Error> {
    if alpha < 0.0 || beta < 0.0 {
        return Err(Error::Coefficient(format!(
            "curl-curl coefficients must be non-negative, got α={alpha}, β={beta}"
        )));
    }
    Ok(maxwell_element_matrix_unchecked(alpha, beta, h))
}

pub(crate) fn maxwell_element_matrix_unchecked(alpha: f64, beta: f64, h: f64) -> [[f64; 12]; 12] {
    let mut k = [[0.0f64; 12]; 12];
    let vol = h * h * h;
    for &(gx, wx) in GAUSS2.iter() {
        for &(gy, wy) in GAUSS2.iter() {
            for &(gz, wz) in GAUSS2.iter() {
                let w = wx * wy * wz * vol;
                let t = [gx, gy, gz];
                let mut val = [[0.0f64; 3]; 12];
                let mut curl = [[0.0f64; 3]; 12];
                for e in 0..12 {
                    val[e] = nedelec_shape(e, t, h);
                    curl[e] = nedelec_curl(e, t, h);
                }
                for i in 0..12 {
                    for j in i..12 {
                        let cc: f64 = (0..3).map(|a| curl[i][a] * curl[j][a]).sum();
                        let mm: f64 = (0..3).map(|a| val[i][a] * val[j][a]).sum();
                        let v = w * (alpha * cc + beta * mm);
                        k[i][j] += v;
                        if i != j {
                            k[j][i] += v;
                        }
                    }
                }
            }
        }
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;

    fn apply24(k: &[[f64; 24]; 24], x: &[f64; 24]) -> [f64; 24] {
        let mut y = [0.0; 24];
        for i in 0..24 {
            for j in 0..24 {
                y[i] += k[i][j] * x[j];
            }
        }
        y
    }

    #[test]
    fn elasticity_rigid_body_kernel() {
        let h = 0.37;
        let k = elasticity_element_matrix(1.3, 0.8, h).unwrap();
        let node = |l: usize| -> [f64; 3] {
            [(l & 1) as f64 * h, ((l >> 1) & 1) as f64 * h, ((l >> 2) & 1) as f64 * h]
        };
        let scale: f64 = k.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));

        // translations
        for c in 0..3 {
            let mut x = [0.0; 24];
            for l in 0..8 {
                x[3 * l + c] = 1.0;
            }
            let y = apply24(&k, &x);
            assert!(y.iter().all(|v| v.abs() <= 1e-12 * scale));
        }
        // rotation u = (-y, x, 0) and its cyclic siblings
        let rots: [fn([f64; 3]) -> [f64; 3]; 3] = [
            |p| [-p[1], p[0], 0.0],
            |p| [0.0, -p[2], p[1]],
            |p| [p[2], 0.0, -p[0]],
        ];
        for rot in rots {
            let mut x = [0.0; 24];
            for l in 0..8 {
                let u = rot(node(l));
                x[3 * l] = u[0];
                x[3 * l + 1] = u[1];
                x[3 * l + 2] = u[2];
            }
            let y = apply24(&k, &x);
            assert!(y.iter().all(|v| v.abs() <= 1e-12 * scale));
        }

        assert!(elasticity_element_matrix(0.0, 1.0, h).is_err());
        assert!(elasticity_element_matrix(1.0, -1.0, h).is_err());
    }

    #[test]
    fn maxwell_gradient_kernel() {
        let h = 0.5;
        let k = maxwell_element_matrix(1.0, 0.0, h).unwrap();
        let scale: f64 = k.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        // discrete gradient of an arbitrary corner field
        let phi = [0.3, -1.2, 0.7, 2.2, -0.4, 0.9, 1.1, -2.5];
        let mut g = [0.0f64; 12];
        for e in 0..12 {
            let (axis, a, b) = edge_decompose(e);
            let (t1, t2) = transverse_axes(axis);
            let mut tail = [0usize; 3];
            tail[t1] = a;
            tail[t2] = b;
            let mut head = tail;
            head[axis] = 1;
            let node = |p: [usize; 3]| p[0] + 2 * p[1] + 4 * p[2];
            g[e] = phi[node(head)] - phi[node(tail)];
        }
        let mut y = [0.0f64; 12];
        for i in 0..12 {
            for j in 0..12 {
                y[i] += k[i][j] * g[j];
            }
        }
        assert!(y.iter().all(|v| v.abs() <= 1e-12 * scale), "{y:?}");
        assert!(maxwell_element_matrix(-1.0, 1.0, h).is_err());
    }

    #[test]
    fn maxwell_mass_constant_field() {
        // constant field x̂ has edge moments h on the four x-edges; the energy
        // ∫|u|² over the cell is h³.
        for &h in &[1.0, 0.5] {
            let m = maxwell_element_matrix(0.0, 1.0, h).unwrap();
            let mut u = [0.0f64; 12];
            for e in 0..4 {
                u[e] = h;
            }
            let mut energy = 0.0;
            for i in 0..12 {
                for j in 0..12 {
                    energy += u[i] * m[i][j] * u[j];
                }
            }
            assert!((energy - h * h * h).abs() < 1e-14);
            if h == 1.0 {
                let block_sum: f64 =
                    (0..4).map(|i| (0..4).map(|j| m[i][j]).sum::<f64>()).sum();
                assert!((block_sum - 1.0).abs() < 1e-14);
            }
        }
    }
}
