//! Matrix exponential by scaling and squaring with diagonal Padé
//! approximants of degree 3, 5, 7, 9 or 13, optionally carrying the
//! Fréchet derivative `L(A, E) = d/dε exp(A + εE)|₀` alongside.
//!
//! The derivative is the exact derivative of the same rational
//! approximant, so it inherits the accuracy of the exponential itself.

use faer::linalg::solvers::Solve;
use faer::Mat;

use super::matrix::{c64, mm, ComplexMatrix};
use crate::error::{Error, Result};

const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

// Largest 1-norms for which each degree meets double-precision backward error.
const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA13: f64 = 5.371920351148152;

/// A matrix paired with an optional first-order perturbation.
struct Dual {
    x: Mat<c64>,
    dx: Option<Mat<c64>>,
}

impl Dual {
    fn mul(&self, rhs: &Dual) -> Dual {
        let x = mm(self.x.as_ref(), rhs.x.as_ref());
        let dx = match (&self.dx, &rhs.dx) {
            (Some(da), Some(db)) => Some(mm(da.as_ref(), rhs.x.as_ref()) + mm(self.x.as_ref(), db.as_ref())),
            _ => None,
        };
        Dual { x, dx }
    }

    fn identity_like(&self) -> Dual {
        let n = self.x.nrows();
        Dual { x: Mat::identity(n, n), dx: self.dx.as_ref().map(|_| Mat::zeros(n, n)) }
    }

    /// `Σ c_k · terms[k]`.
    fn combine(terms: &[(&Dual, f64)]) -> Dual {
        let n = terms[0].0.x.nrows();
        let mut x = Mat::<c64>::zeros(n, n);
        let mut dx = terms[0].0.dx.as_ref().map(|_| Mat::<c64>::zeros(n, n));
        for (d, c) in terms {
            let c = c64::new(*c, 0.0);
            x += &d.x * faer::Scale(c);
            if let (Some(acc), Some(ddx)) = (dx.as_mut(), d.dx.as_ref()) {
                *acc += ddx * faer::Scale(c);
            }
        }
        Dual { x, dx }
    }
}

/// Matrix exponential, accurate to roughly machine precision relative to
/// `‖A‖` for well-behaved inputs.
pub fn expm(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::invalid(format!("expm needs a square matrix, got {}x{}", a.rows(), a.cols())));
    }
    let (e, _) = expm_dual(a, None)?;
    Ok(e)
}

/// Returns `(exp(A), L(A, E))`, the exponential and its Fréchet derivative in
/// direction `E`.
pub fn expm_frechet(a: &ComplexMatrix, e: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    if !a.is_square() || a.rows() != e.rows() || a.cols() != e.cols() {
        return Err(Error::invalid("expm_frechet needs square matrices of equal size"));
    }
    let (x, dx) = expm_dual(a, Some(e))?;
    Ok((x, dx.expect("derivative requested")))
}

fn expm_dual(a: &ComplexMatrix, e: Option<&ComplexMatrix>) -> Result<(ComplexMatrix, Option<ComplexMatrix>)> {
    a.check_finite()?;
    let n = a.rows();
    if n == 0 {
        return Err(Error::invalid("expm of an empty matrix"));
    }

    // exp(A) = exp(μ)·exp(A − μI); the shift only reduces the norm.
    let mu = a.trace() / n as f64;
    let mut shifted = a.as_faer().to_owned();
    for i in 0..n {
        shifted[(i, i)] -= mu;
    }
    let a_shift = ComplexMatrix::from_faer(shifted);
    let norm = a_shift.norm_one();

    let mut degree = 13;
    let mut squarings = 0u32;
    if let Some(&(m, _)) = THETA.iter().find(|(_, th)| norm <= *th) {
        degree = m;
    } else if norm > THETA13 {
        squarings = (norm / THETA13).log2().ceil().max(0.0) as u32;
    }

    let scale = c64::new(0.5f64.powi(squarings as i32), 0.0);
    let base = Dual {
        x: a_shift.as_faer() * faer::Scale(scale),
        dx: e.map(|e| e.as_faer() * faer::Scale(scale)),
    };

    let (u, v) = pade_terms(&base, degree);
    // r = (V − U)⁻¹(V + U)
    let p = Dual::combine(&[(&v, 1.0), (&u, 1.0)]);
    let q = Dual::combine(&[(&v, 1.0), (&u, -1.0)]);
    let lu = q.x.as_ref().partial_piv_lu();
    let x = lu.solve(p.x.as_ref());
    let dx = match (&p.dx, &q.dx) {
        (Some(dp), Some(dq)) => Some(lu.solve((dp - mm(dq.as_ref(), x.as_ref())).as_ref())),
        _ => None,
    };
    let mut r = Dual { x, dx };
    for _ in 0..squarings {
        r = r.mul(&r);
    }

    let growth = mu.exp();
    let x = ComplexMatrix::from_faer(r.x * faer::Scale(growth));
    x.check_finite()?;
    let dx = r.dx.map(|d| ComplexMatrix::from_faer(d * faer::Scale(growth)));
    if let Some(d) = &dx {
        d.check_finite()?;
    }
    Ok((x, dx))
}

/// Odd (`U`) and even (`V`) parts of the degree-`m` Padé numerator.
fn pade_terms(a: &Dual, m: usize) -> (Dual, Dual) {
    let id = a.identity_like();
    let a2 = a.mul(a);
    if m == 13 {
        let b = &PADE13;
        let a4 = a2.mul(&a2);
        let a6 = a4.mul(&a2);
        let inner_u = Dual::combine(&[(&a6, b[13]), (&a4, b[11]), (&a2, b[9])]);
        let u_poly = Dual::combine(&[(&a6.mul(&inner_u), 1.0), (&a6, b[7]), (&a4, b[5]), (&a2, b[3]), (&id, b[1])]);
        let u = a.mul(&u_poly);
        let inner_v = Dual::combine(&[(&a6, b[12]), (&a4, b[10]), (&a2, b[8])]);
        let v = Dual::combine(&[(&a6.mul(&inner_v), 1.0), (&a6, b[6]), (&a4, b[4]), (&a2, b[2]), (&id, b[0])]);
        return (u, v);
    }
    let b: &[f64] = match m {
        3 => &PADE3,
        5 => &PADE5,
        7 => &PADE7,
        _ => &PADE9,
    };
    let mut powers = vec![id, a2];
    while powers.len() <= m / 2 {
        let next = powers.last().unwrap().mul(&powers[1]);
        powers.push(next);
    }
    let odd: Vec<(&Dual, f64)> = (0..=m / 2).map(|k| (&powers[k], b[2 * k + 1])).collect();
    let even: Vec<(&Dual, f64)> = (0..=m / 2).map(|k| (&powers[k], b[2 * k])).collect();
    let u = a.mul(&Dual::combine(&odd));
    let v = Dual::combine(&even);
    (u, v)
}

/// Truncated Taylor series, used as an independent check for small norms.
#[cfg(test)]
pub(crate) fn expm_taylor(a: &ComplexMatrix, terms: usize) -> ComplexMatrix {
    let n = a.rows();
    let mut acc = ComplexMatrix::identity(n);
    let mut term = ComplexMatrix::identity(n);
    for k in 1..terms {
        term = (&term * a).scale_real(1.0 / k as f64);
        acc = &acc + &term;
    }
    acc
}
