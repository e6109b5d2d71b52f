//! Stable manifolds of the line of dipole equilibria `(r, 0, ..., 0)` of the
//! observable system on the symmetric torus.
//!
//! Graph coordinates are `x = (A, w, z, Re P, Im P, Re Q, Im Q)` and each
//! manifold is written as `R = f(x; r)` to quadratic order. Two independent
//! routes to `f` live here: the closed-form polynomial ([`printed_graph`]) and
//! the diagonalized construction ([`StableManifoldChart`]) whose coefficient
//! table is pushed back through the eigenvector matrix.

use nalgebra::SMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::integrate::{integrate, TimeGrid};
use crate::observables::{ObservableState, ObservableSystem};

pub type Mat8 = SMatrix<f64, 8, 8>;

/// Names of the graph coordinates, in storage order.
pub const GRAPH_COORDS: [&str; 7] = ["A", "w", "z", "P_re", "P_im", "Q_re", "Q_im"];

/// Width of the excluded bands around `r = 0` and `r = 1`.
pub const R_BAND: f64 = 1e-6;

/// Floor on `λ + r` (equivalently on `R`) where `1/R` terms are evaluated.
pub const QUOTIENT_FLOOR: f64 = 1e-12;

fn check_nu(nu: f64) -> Result<()> {
    if nu.is_finite() && nu > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("nu must be positive, got {nu}")))
    }
}

fn check_r(r: f64) -> Result<()> {
    if r.is_finite() && r >= R_BAND {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("r must be positive and outside the band |r| < {R_BAND}, got {r}")))
    }
}

/// A quadratic polynomial `r + Σ lin[a] x_a + Σ_{a<=b} quad[a][b] x_a x_b`.
///
/// Only the upper triangle of `quad` is used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticGraph {
    pub r: f64,
    pub lin: [f64; 7],
    pub quad: [[f64; 7]; 7],
}

impl QuadraticGraph {
    pub fn eval(&self, x: &[f64; 7]) -> f64 {
        let mut f = self.r;
        for a in 0..7 {
            f += self.lin[a] * x[a];
            for b in a..7 {
                f += self.quad[a][b] * x[a] * x[b];
            }
        }
        f
    }

    pub fn gradient(&self, x: &[f64; 7]) -> [f64; 7] {
        let mut g = self.lin;
        for a in 0..7 {
            for b in a..7 {
                let c = self.quad[a][b];
                g[a] += c * x[b];
                g[b] += c * x[a];
            }
        }
        g
    }
}

/// The closed-form quadratic graph `f(·; r)`.
pub fn printed_graph(r: f64, nu: f64) -> Result<QuadraticGraph> {
    check_r(r)?;
    check_nu(nu)?;
    const A: usize = 0;
    const W: usize = 1;
    const Z: usize = 2;
    const PR: usize = 3;
    const PI: usize = 4;
    const QR: usize = 5;
    const QI: usize = 6;
    let (n2, n3, n4) = (nu * nu, nu * nu * nu, nu * nu * nu * nu);
    let rm = r * r - 1.0;
    let rp = r + 1.0;
    let mut lin = [0.0; 7];
    lin[W] = rm / (16.0 * n2);
    lin[Z] = rm / (16.0 * n2);
    lin[PR] = -rp / (2.0 * nu);
    lin[QR] = rp / (2.0 * nu);
    let mut q = [[0.0; 7]; 7];
    q[A][W] = -rm / (160.0 * n4);
    q[A][Z] = -rm / (160.0 * n4);
    q[A][PR] = rp / (40.0 * n3);
    q[A][QR] = -rp / (40.0 * n3);
    q[W][Z] = rm / (768.0 * n4 * r) * (7.0 * r * r + 2.0 * r + 1.0);
    q[W][PR] = -rp / (96.0 * n3 * r) * (4.0 * r * r - r + 1.0);
    q[W][QR] = rp / (96.0 * n3) * (3.0 * r + 1.0);
    q[W][W] = rm / (768.0 * n4) * (3.0 * r + 2.0);
    q[Z][PR] = -rp / (96.0 * n3) * (3.0 * r + 1.0);
    q[Z][QR] = rp / (96.0 * n3 * r) * (4.0 * r * r - r + 1.0);
    q[Z][Z] = rm / (768.0 * n4) * (3.0 * r + 2.0);
    q[PR][QR] = -rm / (8.0 * n2 * r);
    q[PI][QI] = -rp * rp / (8.0 * n2 * r);
    Ok(QuadraticGraph { r, lin, quad: q })
}

/// `R` on the stable manifold through `(r, 0, ..., 0)` at graph point `point`.
pub fn manifold_eval(r: f64, point: &[f64; 7], nu: f64) -> Result<f64> {
    Ok(printed_graph(r, nu)?.eval(point))
}

/// Shifted observable field `Ẋ = J X + N(X)` about `(r, 0, ..., 0)`, with
/// `X = (R - r, A, w, z, Re P, Im P, Re Q, Im Q)`.
pub fn shifted_field(x: &[f64; 8], r: f64, nu: f64) -> Result<[f64; 8]> {
    let [rt, a, w, z, pr, pi, qr, qi] = *x;
    let rr = rt + r;
    if !(rr.abs() > QUOTIENT_FLOOR) {
        return Err(Error::DivisionHazard { what: "R", value: rr });
    }
    let inv = 1.0 / rr;
    let damp = a / (5.0 * nu);
    let diff = pr - qr;
    Ok([
        (1.0 + rt + r) * diff,
        -2.0 * nu * a + 3.0 / (20.0 * nu) * a * (w + z),
        -4.0 * nu * w - 2.0 / (5.0 * nu) * w * a,
        -4.0 * nu * z - 2.0 / (5.0 * nu) * z * a,
        -2.0 * nu * pr + z / 2.0 * (1.0 - rt - r) - damp * pr
            + diff * pr
            + 0.5 * pr * qr * (1.0 - inv)
            + 0.5 * pi * qi * (1.0 + inv),
        -2.0 * nu * pi - damp * pi + diff * pi + 0.5 * pi * qr * (1.0 - inv) - 0.5 * pr * qi * (1.0 + inv),
        -2.0 * nu * qr + w / 2.0 * (rt + r - 1.0) - damp * qr + diff * qr + 0.5 * pr * qr * (inv - 1.0)
            - 0.5 * pi * qi * (inv + 1.0),
        -2.0 * nu * qi - damp * qi + diff * qi + 0.5 * pi * qr * (inv + 1.0) + 0.5 * pr * qi * (inv - 1.0),
    ])
}

/// The field in diagonalized coordinates `y = S⁻¹ X`.
pub fn shifted_rhs(y: &[f64; 8], r: f64, nu: f64) -> Result<[f64; 8]> {
    check_nu(nu)?;
    if (r - 1.0).abs() < R_BAND {
        return Err(Error::InvalidParams("the diagonalizing transform is singular at r = 1".into()));
    }
    let [y1, y2, y3, y4, y5, y6, y7, y8] = *y;
    let rp = r + 1.0;
    let rm = r - 1.0;
    let lam = y1 + rp / (4.0 * nu) * (y3 - y4) - rp / (2.0 * nu) * (y5 - y7);
    if !((lam + r).abs() > QUOTIENT_FLOOR) {
        return Err(Error::DivisionHazard { what: "lambda + r", value: lam + r });
    }
    let inv = 1.0 / (lam + r);
    let s45 = y4 + y5;
    let s37 = y3 + y7;
    let d = s45 - s37;

    let dy1 = lam * d
        + rp / rm * (y3 - y4) * lam
        + rp / (10.0 * nu * nu) * y2 * (y7 - y5)
        + rp / (2.0 * nu) * d * d
        + rp / (2.0 * nu) * s45 * s37 * (1.0 - inv)
        + rp / (2.0 * nu) * y6 * y8 * (1.0 + inv);
    let dy2 = -2.0 * nu * y2 + 3.0 / (5.0 * rm) * y2 * (y4 - y3);
    let dy3 = -4.0 * nu * y3 - 2.0 / (5.0 * nu) * y2 * y3;
    let dy4 = -4.0 * nu * y4 - 2.0 / (5.0 * nu) * y2 * y4;
    let dy5 = -2.0 * nu * y5 + 2.0 / (5.0 * nu) * y2 * y4 - 2.0 * nu / rm * lam * y4 - 1.0 / (5.0 * nu) * y2 * s45
        + d * s45
        + 0.5 * s45 * s37 * (1.0 - inv)
        + 0.5 * y6 * y8 * (1.0 + inv);
    let dy6 = -2.0 * nu * y6 - 1.0 / (5.0 * nu) * y2 * y6 + y6 * d + 0.5 * y6 * s37 * (1.0 - inv)
        - 0.5 * y8 * s45 * (1.0 + inv);
    let dy7 = -2.0 * nu * y7 + 2.0 / (5.0 * nu) * y2 * y3 - 2.0 * nu / rm * lam * y3 - 1.0 / (5.0 * nu) * y2 * s37
        + d * s37
        + 0.5 * s45 * s37 * (inv - 1.0)
        - 0.5 * y6 * y8 * (1.0 + inv);
    let dy8 = -2.0 * nu * y8 - 1.0 / (5.0 * nu) * y2 * y8
        + y8 * d
        + 0.5 * y6 * s37 * (1.0 + inv)
        + 0.5 * y8 * s45 * (inv - 1.0);
    Ok([dy1, dy2, dy3, dy4, dy5, dy6, dy7, dy8])
}

/// Diagonalized description of the stable manifold through `(r, 0, ..., 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StableManifoldChart {
    pub r: f64,
    pub nu: f64,
    /// Eigenvector matrix of the Jacobian at the fixed point.
    pub s: Mat8,
    pub s_inv: Mat8,
    /// Eigenvalues, in the column order of `s`.
    pub lambda: [f64; 8],
    /// Nonzero `c_ij` (1-based `i <= j`) of `y1 = h(y2, ..., y8) = Σ c_ij y_i y_j`.
    pub coefficients: Vec<((usize, usize), f64)>,
}

impl StableManifoldChart {
    pub fn new(r: f64, nu: f64) -> Result<Self> {
        check_r(r)?;
        check_nu(nu)?;
        if (r - 1.0).abs() < R_BAND {
            return Err(Error::InvalidParams(format!(
                "r = {r} is inside the band |r - 1| < {R_BAND} where the eigenvector matrix is singular"
            )));
        }
        let rp = r + 1.0;
        let rm = r - 1.0;
        let a = rp / (4.0 * nu);
        let b = rp / (2.0 * nu);
        let g = 4.0 * nu / rm;
        #[rustfmt::skip]
        let s = Mat8::from_row_slice(&[
            1.0, 0.0, a,   -a,  -b,  0.0, b,   0.0,
            0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
            0.0, 0.0, -g,  0.0, 0.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 0.0, g,   0.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0,
            0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0,
            0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0,
        ]);
        let c = (r * r - 1.0) / (16.0 * nu * nu);
        let e = rm / (4.0 * nu);
        #[rustfmt::skip]
        let s_inv = Mat8::from_row_slice(&[
            1.0, 0.0, -c,  -c,  b,   0.0, -b,  0.0,
            0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
            0.0, 0.0, -e,  0.0, 0.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 0.0, e,   0.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 0.0, -e,  1.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0,
            0.0, 0.0, e,   0.0, 0.0, 0.0, 1.0, 0.0,
            0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0,
        ]);
        let m = -2.0 * nu;
        let lambda = [0.0, m, 2.0 * m, 2.0 * m, m, m, m, m];

        let q = rp / rm;
        let n2 = nu * nu;
        let coefficients = vec![
            ((2, 5), rp / (40.0 * n2 * nu)),
            ((2, 7), -rp / (40.0 * n2 * nu)),
            ((3, 3), -r * rp / (16.0 * n2 * rm)),
            ((3, 4), rp / (16.0 * n2) * (q + 1.0 / r)),
            ((3, 5), -rp / (12.0 * n2) * (0.5 - q - 1.0 / r)),
            ((3, 7), -rp / (12.0 * n2) * (0.5 + q)),
            ((4, 4), -r * rp / (16.0 * n2 * rm)),
            ((4, 5), -rp / (12.0 * n2) * (0.5 + q)),
            ((4, 7), -rp / (12.0 * n2) * (0.5 - q - 1.0 / r)),
            ((5, 7), -(r * r - 1.0) / (8.0 * n2 * r)),
            ((6, 8), -rp * rp / (8.0 * n2 * r)),
        ];
        Ok(Self { r, nu, s, s_inv, lambda, coefficients })
    }

    /// Jacobian of the shifted field at the origin.
    pub fn jacobian(&self) -> Mat8 {
        let (r, m) = (self.r, -2.0 * self.nu);
        let mut j = Mat8::zeros();
        j[(0, 4)] = 1.0 + r;
        j[(0, 6)] = -(1.0 + r);
        j[(1, 1)] = m;
        j[(2, 2)] = 2.0 * m;
        j[(3, 3)] = 2.0 * m;
        j[(4, 3)] = 0.5 * (1.0 - r);
        j[(4, 4)] = m;
        j[(5, 5)] = m;
        j[(6, 2)] = 0.5 * (r - 1.0);
        j[(6, 6)] = m;
        j[(7, 7)] = m;
        j
    }

    /// `y1 = h(y2, ..., y8)` on the manifold.
    pub fn h(&self, y_stable: &[f64; 7]) -> f64 {
        self.coefficients.iter().map(|&((i, j), c)| c * y_stable[i - 2] * y_stable[j - 2]).sum()
    }

    /// The graph `R = f(x)` reconstructed from the diagonalized table.
    ///
    /// Row 1 of `S⁻¹` supplies the linear part. The stable coordinates are the
    /// linear images `y_k = Σ_a S⁻¹[k][a+1] x_a` (rows 2..8 have no `R`
    /// component), so the quadratic part is the pullback of the table.
    pub fn pushed_graph(&self) -> QuadraticGraph {
        let mut lin = [0.0; 7];
        for (a, l) in lin.iter_mut().enumerate() {
            *l = -self.s_inv[(0, a + 1)];
        }
        // m[k][a]: coefficient of x_a in y_{k+2}.
        let mut m = [[0.0; 7]; 7];
        for (k, row) in m.iter_mut().enumerate() {
            for (a, v) in row.iter_mut().enumerate() {
                *v = self.s_inv[(k + 1, a + 1)];
            }
        }
        let mut full = [[0.0; 7]; 7];
        for &((i, j), c) in &self.coefficients {
            let (ri, rj) = (m[i - 2], m[j - 2]);
            for a in 0..7 {
                for b in 0..7 {
                    full[a][b] += c * ri[a] * rj[b];
                }
            }
        }
        let mut quad = [[0.0; 7]; 7];
        for a in 0..7 {
            quad[a][a] = full[a][a];
            for b in a + 1..7 {
                quad[a][b] = full[a][b] + full[b][a];
            }
        }
        QuadraticGraph { r: self.r, lin, quad }
    }
}

/// Instantaneous invariance defect `|Ṙ - ∇f · ẋ|` at the graph point `scale · direction`.
pub fn manifold_residual(r: f64, nu: f64, direction: &[f64; 7], scale: f64) -> Result<f64> {
    let norm = direction.iter().map(|d| d * d).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::Precondition(format!("direction must be a unit vector, norm = {norm}")));
    }
    if !(scale >= 0.0) {
        return Err(Error::Precondition(format!("scale must be nonnegative, got {scale}")));
    }
    let graph = printed_graph(r, nu)?;
    let x = direction.map(|d| d * scale);
    let big_r = graph.eval(&x);
    if !(big_r > QUOTIENT_FLOOR) {
        return Err(Error::DivisionHazard { what: "R on the graph", value: big_r });
    }
    let sys = ObservableSystem { nu };
    let v = sys.rhs(&graph_point(big_r, &x)).to_array();
    let g = graph.gradient(&x);
    let along: f64 = g.iter().zip(&v[1..]).map(|(g, v)| g * v).sum();
    Ok((v[0] - along).abs())
}

fn graph_point(big_r: f64, x: &[f64; 7]) -> ObservableState {
    ObservableState::from_array([big_r, x[0], x[1], x[2], x[3], x[4], x[5], x[6]])
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut f = 0.0;
    while i > 0 {
        f += (i % base) as f64 * inv;
        i /= base;
        inv /= base as f64;
    }
    f
}

/// `n` unit vectors in the graph coordinates from a Halton sequence.
///
/// The A, w and z components are taken nonnegative so that every point is a
/// realizable magnitude.
pub fn sample_directions(n: usize) -> Vec<[f64; 7]> {
    const BASES: [u64; 7] = [2, 3, 5, 7, 11, 13, 17];
    (1..=n as u64)
        .map(|i| {
            let mut d: [f64; 7] = std::array::from_fn(|k| 2.0 * radical_inverse(i, BASES[k]) - 1.0);
            for v in d.iter_mut().take(3) {
                *v = v.abs();
            }
            let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
            d.map(|v| v / norm)
        })
        .collect()
}

/// Least-squares slope of `ln residual` against `ln scale`.
pub fn residual_order(r: f64, nu: f64, direction: &[f64; 7], scales: &[f64]) -> Result<f64> {
    let mut xs = Vec::with_capacity(scales.len());
    let mut ys = Vec::with_capacity(scales.len());
    for &s in scales {
        let res = manifold_residual(r, nu, direction, s)?;
        xs.push(s.ln());
        ys.push(res);
    }
    crate::observables::fit_log_slope(&xs, &ys)
}

/// End state of a run started on the graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Attraction {
    /// Final value of `R`.
    pub r_final: f64,
    /// Largest final magnitude among the seven graph coordinates.
    pub stable_max: f64,
}

/// Integrates the observable system from the graph point `scale · direction`.
pub fn attraction_run(r: f64, nu: f64, direction: &[f64; 7], scale: f64, t_end: f64, dt: f64) -> Result<Attraction> {
    let graph = printed_graph(r, nu)?;
    let x = direction.map(|d| d * scale);
    let start = graph_point(graph.eval(&x), &x);
    if !(start.r > QUOTIENT_FLOOR) {
        return Err(Error::DivisionHazard { what: "R on the graph", value: start.r });
    }
    let sys = ObservableSystem { nu };
    let grid = TimeGrid::fixed(0.0, t_end, dt)?.with_stride(usize::MAX)?;
    let traj = integrate(|o: &ObservableState| sys.rhs(o), start, &grid)?;
    let end = traj.last().to_array();
    Ok(Attraction { r_final: end[0], stable_max: end[1..].iter().fold(0.0, |m, v| m.max(v.abs())) })
}

/// Eigenvalues of `j`, sorted by real part.
pub fn sorted_eigenvalues(j: &Mat8) -> Vec<Complex64> {
    let mut ev: Vec<Complex64> = j.complex_eigenvalues().iter().map(|c| Complex64::new(c.re, c.im)).collect();
    ev.sort_by(|a, b| a.re.total_cmp(&b.re));
    ev
}

/// Central-difference Jacobian of the observable field at `(r, 0, ..., 0)`.
pub fn numerical_jacobian(r: f64, nu: f64, h: f64) -> Mat8 {
    let sys = ObservableSystem { nu };
    let base = ObservableState::fixed_point(r).to_array();
    let mut j = Mat8::zeros();
    for col in 0..8 {
        let mut plus = base;
        let mut minus = base;
        plus[col] += h;
        minus[col] -= h;
        let fp = sys.rhs(&ObservableState::from_array(plus)).to_array();
        let fm = sys.rhs(&ObservableState::from_array(minus)).to_array();
        for row in 0..8 {
            j[(row, col)] = (fp[row] - fm[row]) / (2.0 * h);
        }
    }
    j
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn graph_through_fixed_point() {
        for r in [0.3, 1.0, 2.5] {
            assert_eq!(manifold_eval(r, &[0.0; 7], 0.1).unwrap(), r);
        }
        assert!(manifold_eval(0.0, &[0.0; 7], 0.1).is_err());
        assert!(manifold_eval(1.0, &[0.0; 7], 0.0).is_err());
    }

    #[test]
    fn symmetric_ratio_drops_difference_terms() {
        let g = printed_graph(1.0, 0.2).unwrap();
        assert_eq!(g.lin[1], 0.0);
        assert_eq!(g.lin[2], 0.0);
        assert_relative_eq!(g.lin[3], -1.0 / 0.2, max_relative = 1e-15);
        assert_relative_eq!(g.lin[5], 1.0 / 0.2, max_relative = 1e-15);
        assert_eq!(g.quad[0][1], 0.0);
        assert_eq!(g.quad[1][2], 0.0);
        assert_eq!(g.quad[3][5], 0.0);
    }

    #[test]
    fn term_by_term_example() {
        let mut x = [0.0; 7];
        x[1] = 1e-3;
        let f = manifold_eval(2.0, &x, 0.1).unwrap();
        let want = 2.0 + 3.0 / (16.0 * 0.01) * 1e-3 + 3.0 * 8.0 / (768.0 * 1e-4) * 1e-6;
        assert_relative_eq!(f, want, max_relative = 1e-14);
    }

    #[test]
    fn similarity_and_inverse() {
        for (r, nu) in [(0.5, 0.05), (2.0, 0.1), (3.7, 0.3)] {
            let ch = StableManifoldChart::new(r, nu).unwrap();
            let id = ch.s * ch.s_inv;
            assert!((id - Mat8::identity()).abs().max() < 1e-12);
            let d = ch.s_inv * ch.jacobian() * ch.s;
            let want = Mat8::from_diagonal(&nalgebra::SVector::<f64, 8>::from(ch.lambda));
            assert!((d - want).abs().max() < 1e-12);
        }
        assert!(StableManifoldChart::new(1.0, 0.1).is_err());
        assert!(StableManifoldChart::new(1.0 + 1e-7, 0.1).is_err());
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let ch = StableManifoldChart::new(1.7, 0.08).unwrap();
        let fd = numerical_jacobian(1.7, 0.08, 1e-6);
        assert!((fd - ch.jacobian()).abs().max() < 1e-8);
    }

    #[test]
    fn eigenvalue_multiset() {
        let nu = 0.07;
        let ch = StableManifoldChart::new(2.0, nu).unwrap();
        let ev = sorted_eigenvalues(&ch.jacobian());
        let want = [-4.0, -4.0, -2.0, -2.0, -2.0, -2.0, -2.0, 0.0].map(|x| x * nu);
        for (e, w) in ev.iter().zip(want) {
            assert!((e.re - w).abs() < 1e-10 && e.im.abs() < 1e-10, "{e} vs {w}");
        }
    }

    #[test]
    fn y_system_axis() {
        let nu = 0.1;
        let mut y = [0.0; 8];
        assert_eq!(shifted_rhs(&y, 2.0, nu).unwrap(), [0.0; 8]);
        y[1] = 0.3;
        let d = shifted_rhs(&y, 2.0, nu).unwrap();
        let mut want = [0.0; 8];
        want[1] = -2.0 * nu * 0.3;
        assert_eq!(d, want);
    }

    #[test]
    fn y_system_is_conjugate_to_shifted_field() {
        let (r, nu) = (2.3, 0.12);
        let ch = StableManifoldChart::new(r, nu).unwrap();
        for dir in sample_directions(8) {
            let y = nalgebra::SVector::<f64, 8>::from([1e-3, dir[0], dir[1], dir[2], dir[3], dir[4], dir[5], dir[6]])
                * 1e-2;
            let x = ch.s * y;
            let fx = shifted_field(&x.into(), r, nu).unwrap();
            let oracle = ch.s_inv * nalgebra::SVector::<f64, 8>::from(fx);
            let got = shifted_rhs(&y.into(), r, nu).unwrap();
            for k in 0..8 {
                assert!((got[k] - oracle[k]).abs() <= 1e-10 * oracle.abs().max(), "component {k}");
            }
        }
    }

    #[test]
    fn pushed_table_reproduces_printed_graph() {
        for (r, nu) in [(0.4, 0.05), (2.0, 0.1), (5.0, 0.03)] {
            let printed = printed_graph(r, nu).unwrap();
            let pushed = StableManifoldChart::new(r, nu).unwrap().pushed_graph();
            for a in 0..7 {
                assert_relative_eq!(pushed.lin[a], printed.lin[a], max_relative = 1e-10);
                for b in a..7 {
                    let (p, q) = (pushed.quad[a][b], printed.quad[a][b]);
                    let scale = printed.quad.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
                    assert!((p - q).abs() <= 1e-10 * q.abs().max(1e-6 * scale), "({a},{b}): {p} vs {q}");
                }
            }
        }
    }

    #[test]
    fn residual_on_a_axis_is_zero() {
        let mut d = [0.0; 7];
        d[0] = 1.0;
        for s in [1e-3, 1e-2, 0.1] {
            assert_eq!(manifold_residual(0.7, 0.1, &d, s).unwrap(), 0.0);
        }
        let dir = sample_directions(1)[0];
        assert_eq!(manifold_residual(0.7, 0.1, &dir, 0.0).unwrap(), 0.0);
        assert!(manifold_residual(0.7, 0.1, &[1.0; 7], 0.1).is_err());
    }

    #[test]
    fn residual_is_cubic() {
        let dir = sample_directions(3)[2];
        let r1 = manifold_residual(2.0, 0.1, &dir, 1e-2).unwrap();
        let r2 = manifold_residual(2.0, 0.1, &dir, 5e-3).unwrap();
        let r3 = manifold_residual(2.0, 0.1, &dir, 2.5e-3).unwrap();
        assert!(r1 / r2 >= 6.0 && r2 / r3 >= 6.0, "{} {}", r1 / r2, r2 / r3);
    }

    #[test]
    fn directions_are_unit_and_distinct() {
        let d = sample_directions(32);
        assert_eq!(d.len(), 32);
        for v in &d {
            let n: f64 = v.iter().map(|x| x * x).sum();
            assert!((n - 1.0).abs() < 1e-12);
            assert!(v[..3].iter().all(|x| *x >= 0.0));
        }
        assert_ne!(d[0], d[1]);
        assert_eq!(d, sample_directions(32));
    }
}
