use alloc::string::String;

use nalgebra::{DMatrix, DVector};

use super::{ReductorError, ReductorId};
use crate::linalg::{orthonormality_defect, LinalgError, MassMatrix};
use crate::system::{EvalError, System};

/// Orthonormality tolerance checked by [`galerkin_project`].
pub const ORTHONORMAL_TOL: f64 = 1e-10;

/// Where a reduced model came from.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Provenance {
    pub reductor: Option<ReductorId>,
    /// Fingerprint of the training scenario.
    pub scenario: String,
}

/// Galerkin reduced model `E_r ẋ_r = A_r x_r + B_r u + Vᵀ f(V x_r)`,
/// `y = C_r x_r + D u`, borrowing the full model for the nonlinearity.
#[derive(Debug, Clone)]
pub struct ReducedModel<'a, S: System + ?Sized> {
    full: &'a S,
    basis: DMatrix<f64>,
    mass: MassMatrix,
    energy: MassMatrix,
    linear: DMatrix<f64>,
    input: DMatrix<f64>,
    output: DMatrix<f64>,
    feedthrough: Option<DMatrix<f64>>,
    pub provenance: Provenance,
}

/// Projects `full` onto the span of the orthonormal `basis`.
pub fn galerkin_project<'a, S: System + ?Sized>(full: &'a S, basis: &DMatrix<f64>) -> Result<ReducedModel<'a, S>, ReductorError> {
    if basis.ncols() == 0 {
        return Err(ReductorError::ZeroOrder);
    }
    if basis.nrows() != full.state_dim() {
        return Err(ReductorError::Dimension {
            expected: full.state_dim(),
            found: basis.nrows(),
        });
    }
    let defect = orthonormality_defect(basis);
    if !(defect <= ORTHONORMAL_TOL) {
        return Err(ReductorError::NotOrthonormal { defect });
    }
    let vt = basis.transpose();
    Ok(ReducedModel {
        full,
        basis: basis.clone(),
        mass: full.mass().congruence(basis)?,
        energy: full.energy().congruence(basis)?,
        linear: &vt * full.linear() * basis,
        input: &vt * full.input_map(),
        output: full.output_map() * basis,
        feedthrough: full.feedthrough().cloned(),
        provenance: Provenance::default(),
    })
}

impl<'a, S: System + ?Sized> ReducedModel<'a, S> {
    pub fn order(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn full(&self) -> &'a S {
        self.full
    }

    /// `V x_r`.
    pub fn lift(&self, xr: &DVector<f64>) -> DVector<f64> {
        &self.basis * xr
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }
}

impl<S: System + ?Sized> System for ReducedModel<'_, S> {
    fn mass(&self) -> &MassMatrix {
        &self.mass
    }
    fn energy(&self) -> &MassMatrix {
        &self.energy
    }
    fn linear(&self) -> &DMatrix<f64> {
        &self.linear
    }
    fn input_map(&self) -> &DMatrix<f64> {
        &self.input
    }
    fn output_map(&self) -> &DMatrix<f64> {
        &self.output
    }
    fn feedthrough(&self) -> Option<&DMatrix<f64>> {
        self.feedthrough.as_ref()
    }
    fn nonlinear(&self, xr: &DVector<f64>) -> Result<DVector<f64>, EvalError> {
        if xr.len() != self.order() {
            return Err(EvalError::Dimension {
                expected: self.order(),
                found: xr.len(),
            });
        }
        let f = self.full.nonlinear(&self.lift(xr))?;
        Ok(self.basis.tr_mul(&f))
    }
    fn jacobian(&self, xr: &DVector<f64>) -> Result<DMatrix<f64>, EvalError> {
        let j = self.full.jacobian(&self.lift(xr))?;
        Ok(self.basis.tr_mul(&(j * &self.basis)))
    }
    fn is_linear(&self) -> bool {
        self.full.is_linear()
    }
}

/// `S = C Q⁻¹ B`.
pub fn steady_gain(output: &DMatrix<f64>, energy: &MassMatrix, input: &DMatrix<f64>) -> Result<DMatrix<f64>, LinalgError> {
    if output.ncols() != energy.dim() || input.nrows() != energy.dim() {
        return Err(LinalgError::Dimension {
            expected: energy.dim(),
            found: if output.ncols() != energy.dim() { output.ncols() } else { input.nrows() },
        });
    }
    Ok(output * energy.solve_matrix(input))
}

/// Mean absolute entry.
pub fn mean_abs(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        0.0
    } else {
        m.iter().map(|v| v.abs()).sum::<f64>() / m.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GainMismatch {
    /// `D = S − S_r`.
    pub matrix: DMatrix<f64>,
    /// Mean absolute entry of `D`.
    pub mean_abs: f64,
}

/// `D = (C Q⁻¹ B + D_full) − (C_r Q_r⁻¹ B_r + D_r)` between any two
/// systems with the same ports.
pub fn gain_mismatch<F: System + ?Sized, R: System + ?Sized>(full: &F, reduced: &R) -> Result<GainMismatch, LinalgError> {
    if full.input_dim() != reduced.input_dim() || full.output_dim() != reduced.output_dim() {
        return Err(LinalgError::Dimension {
            expected: full.input_dim() * full.output_dim(),
            found: reduced.input_dim() * reduced.output_dim(),
        });
    }
    let s = gain_of(full)?;
    let sr = gain_of(reduced)?;
    let matrix = s - sr;
    let mean_abs = mean_abs(&matrix);
    Ok(GainMismatch { matrix, mean_abs })
}

fn gain_of<S: System + ?Sized>(sys: &S) -> Result<DMatrix<f64>, LinalgError> {
    let mut s = steady_gain(sys.output_map(), sys.energy(), sys.input_map())?;
    if let Some(d) = sys.feedthrough() {
        s += d;
    }
    Ok(s)
}

/// Adds `D` to the reduced model's feedthrough, so that its static gain
/// equals the full one.
pub fn apply_gain_matching<'a, S: System + ?Sized>(mut rom: ReducedModel<'a, S>, d: &DMatrix<f64>) -> ReducedModel<'a, S> {
    rom.feedthrough = Some(match rom.feedthrough.take() {
        Some(old) => old + d,
        None => d.clone(),
    });
    rom
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::{integrate, make_stepper, IntegrateOptions, SolverId};
    use crate::system::{ConstantInput, LinearSystem};

    fn diag2() -> LinearSystem {
        LinearSystem::new(
            MassMatrix::from_diagonal(DVector::from_vec(alloc::vec![2.0, 4.0])).unwrap(),
            DMatrix::from_diagonal(&DVector::from_vec(alloc::vec![-1.0, -3.0])),
            DMatrix::from_column_slice(2, 1, &[1.0, 3.0]),
            DMatrix::from_row_slice(1, 2, &[5.0, 2.0]),
        )
        .unwrap()
    }

    #[test]
    fn scalar_gain() {
        let q = MassMatrix::from_diagonal(DVector::from_element(1, 4.0)).unwrap();
        let s = steady_gain(&DMatrix::from_element(1, 1, 2.0), &q, &DMatrix::from_element(1, 1, 3.0)).unwrap();
        assert_eq!(s[(0, 0)], 1.5);
    }

    #[test]
    fn dropped_state_contribution() {
        // keeping e1 loses C₂ Q₂⁻¹ B₂ = 2 · 3 / 4
        let sys = diag2();
        let v = DMatrix::from_column_slice(2, 1, &[1.0, 0.0]);
        let rom = galerkin_project(&sys, &v).unwrap();
        let d = gain_mismatch(&sys, &rom).unwrap();
        assert!((d.matrix[(0, 0)] - 1.5).abs() < 1e-15);
        let back = gain_mismatch(&rom, &sys).unwrap();
        assert_eq!(back.matrix, -d.matrix.clone());
        let fixed = apply_gain_matching(rom, &d.matrix);
        assert!(gain_mismatch(&sys, &fixed).unwrap().mean_abs < 1e-12);
    }

    #[test]
    fn identity_projection_is_exact() {
        let sys = diag2();
        let rom = galerkin_project(&sys, &DMatrix::identity(2, 2)).unwrap();
        assert!(rom.mass().is_diagonal());
        assert_eq!(gain_mismatch(&sys, &rom).unwrap().mean_abs, 0.0);
        let u = ConstantInput(DVector::from_element(1, 1.0));
        let a = integrate(&sys, &mut make_stepper(SolverId::Imex1), &u, &DVector::zeros(2), 3.0, 0.1, IntegrateOptions::default()).unwrap();
        let b = integrate(&rom, &mut make_stepper(SolverId::Imex1), &u, &DVector::zeros(2), 3.0, 0.1, IntegrateOptions::default()).unwrap();
        assert_eq!(a.outputs, b.outputs);
    }

    #[test]
    fn rejects_bad_bases() {
        let sys = diag2();
        assert!(matches!(galerkin_project(&sys, &DMatrix::zeros(2, 0)), Err(ReductorError::ZeroOrder)));
        let skew = DMatrix::from_column_slice(2, 1, &[1.0, 1.0]);
        assert!(matches!(galerkin_project(&sys, &skew), Err(ReductorError::NotOrthonormal { .. })));
    }
}
