use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result, SolverError};
use crate::problem::{MeasurementIndex, MtsProblem};

/// Linear measurements `y_i = a_i^T x + d_i` with `x` in `R^n`.
#[derive(Debug, Clone)]
pub struct LinearProblem {
    design: DMatrix<f64>,
    observations: DVector<f64>,
}

impl LinearProblem {
    /// `design` is `m x n` with one row `a_i^T` per measurement.
    pub fn new(design: DMatrix<f64>, observations: DVector<f64>) -> Result<Self> {
        if design.nrows() != observations.len() {
            return Err(Error::InvalidConfig(format!(
                "{} design rows but {} observations",
                design.nrows(),
                observations.len()
            )));
        }
        if design.ncols() == 0 {
            return Err(Error::InvalidConfig("dimension must be positive".into()));
        }
        if design.iter().chain(observations.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("non-finite value in linear problem".into()));
        }
        Ok(Self { design, observations })
    }

    pub fn from_rows(rows: &[Vec<f64>], observations: &[f64]) -> Result<Self> {
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidConfig("rows have different dimensions".into()));
        }
        let design = DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j]);
        Self::new(design, DVector::from_column_slice(observations))
    }

    /// One-dimensional problem with `a_i = 1`: estimating a constant.
    pub fn scalar(observations: &[f64]) -> Result<Self> {
        Self::new(
            DMatrix::from_element(observations.len(), 1, 1.0),
            DVector::from_column_slice(observations),
        )
    }

    pub fn dim(&self) -> usize {
        self.design.ncols()
    }

    pub fn design(&self) -> &DMatrix<f64> {
        &self.design
    }

    pub fn observations(&self) -> &DVector<f64> {
        &self.observations
    }

    /// Stacked design rows and observations for `inliers`.
    pub fn select(&self, inliers: &[MeasurementIndex]) -> (DMatrix<f64>, DVector<f64>) {
        let a = DMatrix::from_fn(inliers.len(), self.dim(), |r, c| self.design[(inliers[r], c)]);
        let y = DVector::from_fn(inliers.len(), |r, _| self.observations[inliers[r]]);
        (a, y)
    }
}

/// Least-squares solution over `inliers` through a Householder QR of the
/// stacked design matrix.
pub fn linear_fit(problem: &LinearProblem, inliers: &[MeasurementIndex]) -> Result<DVector<f64>, SolverError> {
    let n = problem.dim();
    if inliers.len() < n {
        return Err(SolverError::NotEnoughMeasurements {
            got: inliers.len(),
            required: n,
        });
    }
    let (a, y) = problem.select(inliers);
    let qr = a.qr();
    let r = qr.r();
    let diag_max = r.diagonal().iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let tol = diag_max * (inliers.len().max(n) as f64) * f64::EPSILON;
    if diag_max == 0.0 || r.diagonal().iter().any(|v| v.abs() <= tol) {
        return Err(SolverError::RankDeficient);
    }
    let qty = qr.q().tr_mul(&y);
    r.solve_upper_triangular(&qty).ok_or(SolverError::RankDeficient)
}

impl MtsProblem for LinearProblem {
    type Estimate = DVector<f64>;

    fn measurement_count(&self) -> usize {
        self.design.nrows()
    }

    fn min_measurements(&self) -> usize {
        self.dim()
    }

    fn fit(&self, inliers: &[MeasurementIndex]) -> Result<DVector<f64>, SolverError> {
        linear_fit(self, inliers)
    }

    fn residual(&self, index: MeasurementIndex, x: &DVector<f64>) -> f64 {
        let e = self.observations[index] - self.design.row(index).dot(&x.transpose());
        e * e
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Test-only oracle: `x = (A^T A)^{-1} A^T y` via Cholesky.
    fn normal_equations(a: &DMatrix<f64>, y: &DVector<f64>) -> DVector<f64> {
        let ata = a.tr_mul(a);
        let aty = a.tr_mul(y);
        ata.cholesky().expect("spd").solve(&aty)
    }

    fn random_problem(seed: u64, m: usize, n: usize) -> LinearProblem {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0));
        let y = DVector::from_fn(m, |_, _| rng.random_range(-5.0..5.0));
        LinearProblem::new(a, y).unwrap()
    }

    #[test]
    fn single_row_interpolates() {
        let p = LinearProblem::scalar(&[2.0]).unwrap();
        assert_eq!(linear_fit(&p, &[0]).unwrap()[0], 2.0);
    }

    #[test]
    fn two_rows_give_the_mean() {
        let p = LinearProblem::scalar(&[1.0, 3.0]).unwrap();
        let x = linear_fit(&p, &[0, 1]).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-15);
        let r: f64 = (0..2).map(|i| p.residual(i, &x)).sum();
        assert!((r - 2.0).abs() < 1e-14);
    }

    #[test]
    fn matches_normal_equations() {
        for seed in 0..20 {
            let p = random_problem(seed, 9, 2);
            let idx: Vec<_> = (0..9).collect();
            let x = linear_fit(&p, &idx).unwrap();
            let oracle = normal_equations(p.design(), p.observations());
            let rel = (&x - &oracle).norm() / oracle.norm().max(1.0);
            assert!(rel < 1e-10, "seed {seed}: {rel}");
        }
    }

    #[test]
    fn gradient_vanishes_at_solution() {
        for seed in 0..20 {
            let p = random_problem(100 + seed, 12, 3);
            let idx: Vec<_> = (0..12).step_by(1).collect();
            let x = linear_fit(&p, &idx).unwrap();
            let grad = p.design().tr_mul(&(p.design() * &x - p.observations())) * 2.0;
            let scale = 1.0 + p.observations().amax() + p.design().amax();
            assert!(grad.norm() <= 1e-8 * scale);
        }
    }

    #[test]
    fn singular_design_is_rank_deficient() {
        let p =
            LinearProblem::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0], vec![-1.0, -2.0]], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(linear_fit(&p, &[0, 1, 2]), Err(SolverError::RankDeficient));
        let z = LinearProblem::from_rows(&[vec![0.0]], &[1.0]).unwrap();
        assert_eq!(linear_fit(&z, &[0]), Err(SolverError::RankDeficient));
    }

    #[test]
    fn too_few_rows() {
        let p = random_problem(3, 4, 3);
        assert!(matches!(
            linear_fit(&p, &[0, 1]),
            Err(SolverError::NotEnoughMeasurements { got: 2, required: 3 })
        ));
    }

    #[test]
    fn mismatched_lengths_are_rejected() {
        assert!(LinearProblem::from_rows(&[vec![1.0], vec![1.0]], &[1.0]).is_err());
        assert!(LinearProblem::from_rows(&[vec![1.0], vec![1.0, 2.0]], &[1.0, 2.0]).is_err());
    }
}
