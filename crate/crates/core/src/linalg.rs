//! Small complex linear-algebra helpers shared across modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CVector = DVector<Complex64>;
pub type CMatrix = DMatrix<Complex64>;

/// `a^H b`.
pub fn inner(a: &CVector, b: &CVector) -> Complex64 {
    a.dotc(b)
}

/// `h^H diag(d) v`, the scalar link gain of a diagonal composite channel.
pub fn diag_form(h: &CVector, diag: &CVector, v: &CVector) -> Complex64 {
    debug_assert_eq!(h.len(), diag.len());
    debug_assert_eq!(h.len(), v.len());
    h.iter()
        .zip(diag.iter())
        .zip(v.iter())
        .map(|((h, d), v)| h.conj() * d * v)
        .sum()
}

/// Outer product `v v^H`.
pub fn outer(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let sym = hermitize(m);
    let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m)[0]
}

/// `(M + M^H) / 2`, removing round-off asymmetry before an eigen solve.
pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Largest deviation from Hermitian symmetry, `max |M_ij - conj(M_ji)|`.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Real symmetric embedding `[[Re, -Im], [Im, Re]]` of a Hermitian matrix.
pub fn realify(m: &CMatrix) -> DMatrix<f64> {
    let n = m.nrows();
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = m[(i, j)];
            out[(i, j)] = z.re;
            out[(i + n, j + n)] = z.re;
            out[(i, j + n)] = -z.im;
            out[(i + n, j)] = z.im;
        }
    }
    out
}

/// Entry-wise projection onto the unit circle; zero entries map to 1.
pub fn unit_modulus(v: &CVector) -> CVector {
    v.map(|z| {
        let r = z.norm();
        if r > 0.0 {
            z / r
        } else {
            Complex64::new(1.0, 0.0)
        }
    })
}

/// Rotates a unit-modulus vector so its last entry is exactly 1.
pub fn anchor_last(v: &CVector) -> CVector {
    let last = v[v.len() - 1];
    let r = last.norm();
    let rot = if r > 0.0 {
        (last / r).conj()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let mut out = v.map(|z| z * rot);
    let n = out.len();
    out[n - 1] = Complex64::new(1.0, 0.0);
    out
}
