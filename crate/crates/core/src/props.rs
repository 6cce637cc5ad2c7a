//! Free real-time (Schwinger–Keldysh) propagator components at temperature
//! `T = 1/β`: the four photon components in the Feynman gauge, the four
//! ε-regularized electron components, and the triangular factorization of the
//! electron matrix propagator.
//!
//! Distributional photon parts are never sampled numerically. A photon
//! component is returned as a [`SplitValue`]: an oriented pole coefficient for
//! `1/(k² ± i0)` plus an explicit coefficient of `δ(k²)`. Downstream
//! integrators remove `δ(k²)` analytically (substituting `k₀ = ±|𝐤|` with
//! Jacobian `1/(2|𝐤|)`) before any quadrature runs.
//!
//! Electron components are ordinary matrices: the pole shift
//! `m² − k² − iε` keeps them finite, with the mass-shell δ replaced by
//! `1/(m²−k²−iε) − 1/(m²−k²+iε)`.

use crate::diracalg::{slash, FourVector, Matrix4c};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Contour-index pair of a propagator component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropComponent {
    C11,
    C12,
    C21,
    C22,
}

/// Orientation of the `i0` in an oriented pole `1/(k² ± i0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoleOrientation {
    /// `1/(k² + i0)`
    Plus,
    /// `1/(k² − i0)`
    Minus,
}

/// A distribution of the form `pole_coeff/(k² ± i0) + onshell_weight·δ(k²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitValue {
    /// Coefficient of the oriented pole `1/(k² ± i0)`.
    pub pole_coeff: Complex64,
    /// Orientation of the pole term (irrelevant when `pole_coeff = 0`).
    pub orientation: PoleOrientation,
    /// Explicit coefficient of `δ(k²)`.
    pub onshell_weight: Complex64,
}

impl SplitValue {
    /// Value of the non-distributional part at `k² ≠ 0`, where the `i0` is
    /// immaterial: `pole_coeff / k²`.
    pub fn regular_at(&self, k_square: f64) -> Complex64 {
        self.pole_coeff / k_square
    }

    /// Canonical Sokhotski–Plemelj form `(P-coefficient, δ-coefficient)`:
    /// `1/(k² ± i0) = P(1/k²) ∓ iπ δ(k²)`.
    pub fn canonical(&self) -> (Complex64, Complex64) {
        let sign = match self.orientation {
            PoleOrientation::Plus => -1.0,
            PoleOrientation::Minus => 1.0,
        };
        let delta = self.onshell_weight + self.pole_coeff * Complex64::new(0.0, sign * PI);
        (self.pole_coeff, delta)
    }
}

/// Bose–Einstein occupation `n(𝐤) = 1/(e^{β|𝐤|} − 1)`.
///
/// Strictly decreasing in `kmag`; the `kmag → 0` point is distributional and
/// rejected. Large arguments underflow cleanly to zero through `exp_m1`.
pub fn bose_n(kmag: f64, beta: f64) -> f64 {
    assert!(kmag > 0.0, "bose_n: kmag must be positive, got {kmag}");
    assert!(beta > 0.0, "bose_n: beta must be positive, got {beta}");
    1.0 / (beta * kmag).exp_m1()
}

/// Bose occupation continued to complex momentum (used by the residue term of
/// the ε ↦ −E analytic continuation).
pub fn bose_n_complex(k: Complex64, beta: f64) -> Complex64 {
    let w = k * beta;
    1.0 / (w.exp() - 1.0)
}

/// Photon propagator component in the Feynman gauge, divided by the metric
/// factor `η_{μν}`.
pub fn photon_d(comp: PropComponent, k: FourVector, beta: f64) -> SplitValue {
    assert!(beta > 0.0, "photon_d: beta must be positive");
    let kmag = k.spatial_norm();
    let n = if kmag > 0.0 { bose_n(kmag, beta) } else { f64::NAN };
    let m2pi = Complex64::new(0.0, -2.0 * PI);
    let theta = |x: f64| {
        assert!(x != 0.0, "photon_d: θ(0) ambiguous, k₀ = 0 rejected");
        if x > 0.0 {
            1.0
        } else {
            0.0
        }
    };
    match comp {
        PropComponent::C11 => SplitValue {
            pole_coeff: Complex64::new(1.0, 0.0),
            orientation: PoleOrientation::Plus,
            onshell_weight: m2pi * n,
        },
        PropComponent::C22 => {
            // C22 = −tilde(C11): conjugate the scalar parts, negate.
            SplitValue {
                pole_coeff: Complex64::new(-1.0, 0.0),
                orientation: PoleOrientation::Minus,
                onshell_weight: m2pi * n,
            }
        }
        PropComponent::C21 => SplitValue {
            pole_coeff: Complex64::new(0.0, 0.0),
            orientation: PoleOrientation::Plus,
            onshell_weight: m2pi * (theta(k.t) + n),
        },
        PropComponent::C12 => SplitValue {
            pole_coeff: Complex64::new(0.0, 0.0),
            orientation: PoleOrientation::Plus,
            onshell_weight: m2pi * (theta(-k.t) + n),
        },
    }
}

/// The regularized mass-shell distribution
/// `2πi δ(k² − m²) → 1/(m²−k²−iε) − 1/(m²−k²+iε) = 2iε/((m²−k²)² + ε²)`.
pub fn reg_delta(k_square: f64, eps: f64) -> Complex64 {
    let d = 1.0 - k_square;
    Complex64::new(0.0, 2.0 * eps) / (d * d + eps * eps)
}

fn d_f(k_square: f64, eps: f64) -> Complex64 {
    1.0 / Complex64::new(1.0 - k_square, -eps)
}

/// ε-regularized electron propagator component (`m = 1`):
///
/// * `C11 = (k̸+1)/(1 − k² − iε)`,
/// * `C22 = −tilde(C11) = −(k̸+1)/(1 − k² + iε)`,
/// * `C21 = θ(k₀) (k̸+1) · regδ`, `C12 = −θ(−k₀) (k̸+1) · regδ`.
pub fn electron_d(comp: PropComponent, k: FourVector, eps: f64) -> Matrix4c {
    assert!(eps > 0.0, "electron_d: eps must be positive");
    let k2 = k.square();
    let num = slash(k) + Matrix4c::identity();
    match comp {
        PropComponent::C11 => num * d_f(k2, eps),
        PropComponent::C22 => -(num * d_f(k2, eps).conj()),
        PropComponent::C21 => {
            if k.t > 0.0 {
                num * reg_delta(k2, eps)
            } else {
                Matrix4c::zero()
            }
        }
        PropComponent::C12 => {
            if k.t < 0.0 {
                -(num * reg_delta(k2, eps))
            } else {
                Matrix4c::zero()
            }
        }
    }
}

/// Triangular factor `M(k₀) = [[1, −θ(−k₀)], [θ(k₀), 1]]` of the electron
/// matrix propagator. `k₀ = 0` is rejected.
pub fn m_matrix(k0: f64) -> [[f64; 2]; 2] {
    assert!(k0 != 0.0, "m_matrix: θ ambiguous at k₀ = 0");
    if k0 > 0.0 {
        [[1.0, 0.0], [1.0, 1.0]]
    } else {
        [[1.0, -1.0], [0.0, 1.0]]
    }
}
