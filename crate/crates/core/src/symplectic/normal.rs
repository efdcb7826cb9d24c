use crate::error::{Error, Result};
use crate::linalg::Mat;

use super::{check_symplectic, TOL_SYMPL};

/// D(λ) = diag(λ, 1/λ).
pub fn hyperbolic(lambda: f64) -> Mat {
    nalgebra::dmatrix![lambda, 0.0; 0.0, 1.0 / lambda]
}

/// R(θ) = [[cos θ, −sin θ], [sin θ, cos θ]].
pub fn rotation(theta: f64) -> Mat {
    let (s, c) = theta.sin_cos();
    nalgebra::dmatrix![c, -s; s, c]
}

/// K = [[0, 1], [1, 0]].
pub fn k_matrix() -> Mat {
    nalgebra::dmatrix![0.0, 1.0; 1.0, 0.0]
}

/// Basic normal forms.
#[derive(Debug, Clone, PartialEq)]
pub enum NormalForm {
    /// D(λ), λ = ±2.
    Hyperbolic { lambda: f64 },
    /// N₁(λ, b) = [[λ, b], [0, λ]], λ = ±1, b ∈ {−1, 0, 1}.
    Jordan { lambda: f64, b: f64 },
    /// R(θ), θ ∈ (0, π) ∪ (π, 2π).
    Rotation { theta: f64 },
    /// N₂(e^{iθ}, B) = [[R(θ), B], [0, R(θ)]] with b₂ ≠ b₃. The entry b₄ is
    /// fixed by symplecticity: sin θ (b₁ + b₄) = cos θ (b₃ − b₂).
    Jordan2 { theta: f64, b1: f64, b2: f64, b3: f64 },
}

fn is_rotation_angle(theta: f64) -> bool {
    theta > 0.0 && theta < std::f64::consts::TAU && (theta - std::f64::consts::PI).abs() > 0.0
}

impl NormalForm {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            NormalForm::Hyperbolic { lambda } => lambda == 2.0 || lambda == -2.0,
            NormalForm::Jordan { lambda, b } => {
                (lambda == 1.0 || lambda == -1.0) && (b == -1.0 || b == 0.0 || b == 1.0)
            }
            NormalForm::Rotation { theta } => is_rotation_angle(theta),
            NormalForm::Jordan2 { theta, b2, b3, .. } => is_rotation_angle(theta) && b2 != b3,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Input(format!("normal form parameters out of range: {self:?}")))
        }
    }

    pub fn matrix(&self) -> Result<Mat> {
        self.validate()?;
        let out = match *self {
            NormalForm::Hyperbolic { lambda } => hyperbolic(lambda),
            NormalForm::Jordan { lambda, b } => nalgebra::dmatrix![lambda, b; 0.0, lambda],
            NormalForm::Rotation { theta } => rotation(theta),
            NormalForm::Jordan2 { theta, b1, b2, b3 } => {
                let (s, c) = theta.sin_cos();
                let b4 = c * (b3 - b2) / s - b1;
                let r = rotation(theta);
                let b = nalgebra::dmatrix![b1, b2; b3, b4];
                crate::linalg::from_blocks(&r, &b, &Mat::zeros(2, 2), &r)
            }
        };
        debug_assert!(check_symplectic(&out, TOL_SYMPL).unwrap_or(false));
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_forms_symplectic() {
        let forms = [
            NormalForm::Hyperbolic { lambda: 2.0 },
            NormalForm::Hyperbolic { lambda: -2.0 },
            NormalForm::Jordan { lambda: 1.0, b: 1.0 },
            NormalForm::Jordan { lambda: -1.0, b: -1.0 },
            NormalForm::Jordan { lambda: 1.0, b: 0.0 },
            NormalForm::Rotation { theta: 1.0 },
            NormalForm::Rotation { theta: 4.0 },
            NormalForm::Jordan2 { theta: 0.7, b1: 0.3, b2: 1.0, b3: -1.0 },
            NormalForm::Jordan2 { theta: 5.0, b1: -2.0, b2: 0.0, b3: 0.5 },
        ];
        for f in forms {
            let m = f.matrix().unwrap();
            assert!(check_symplectic(&m, TOL_SYMPL).unwrap(), "{f:?}");
        }
    }

    #[test]
    fn out_of_range_rejected() {
        assert!(NormalForm::Hyperbolic { lambda: 3.0 }.matrix().is_err());
        assert!(NormalForm::Rotation { theta: std::f64::consts::PI }.matrix().is_err());
        assert!(NormalForm::Jordan2 { theta: 1.0, b1: 0.0, b2: 1.0, b3: 1.0 }.matrix().is_err());
    }
}
