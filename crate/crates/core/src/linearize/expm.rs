//! Matrix exponential by scaling and squaring with a [13/13] Padé approximant.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

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

/// 1-norm threshold below which the order-13 approximant needs no scaling.
const THETA13: f64 = 5.371920351148152;

fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `exp(M t)`.
pub fn matrix_exponential(m: &DMatrix<f64>, t: f64) -> Result<DMatrix<f64>> {
    if !m.is_square() {
        return Err(Error::Dimension(format!("expm of a {}x{} matrix", m.nrows(), m.ncols())));
    }
    let n = m.nrows();
    let a = m * t;
    if !a.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("matrix_exponential"));
    }
    let norm = one_norm(&a);
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = a * 2f64.powi(-squarings);

    let ident = DMatrix::<f64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = &PADE13;
    let u_inner = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9]) + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &ident * b[1];
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8]) + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + &ident * b[0];
    let mut r = (&v - &u)
        .lu()
        .solve(&(&v + &u))
        .ok_or(Error::NonFinite("matrix_exponential"))?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    if !r.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("matrix_exponential"));
    }
    Ok(r)
}
