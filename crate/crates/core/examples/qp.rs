//! A small bounded least-squares problem through the ADMM solver.

use nalgebra::{DMatrix, DVector};
use softarm::opt::{solve_qp, QpProblem, QpSettings};

fn main() -> softarm::Result<()> {
    // min ½‖x − (2, −3, 0.5)‖² subject to |x_i| ≤ 1 and x_0 + x_1 + x_2 = 0.5.
    let h = DMatrix::identity(3, 3);
    let f = -DVector::from_vec(vec![2.0, -3.0, 0.5]);
    let qp = QpProblem::new(h, f)
        .with_equalities(DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 1.0]), DVector::from_element(1, 0.5))
        .with_inequalities(DMatrix::identity(3, 3), DVector::from_element(3, -1.0), DVector::from_element(3, 1.0));
    let sol = solve_qp(&qp, &QpSettings::default())?;
    println!("status {:?} after {} iterations (polished: {})", sol.status, sol.iterations, sol.polished);
    println!("x = {:.9?}", sol.x.as_slice());
    println!("active set {:?}", sol.active_set);
    println!("KKT residuals {:?}", sol.residuals);
    Ok(())
}
