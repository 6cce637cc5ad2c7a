//! Exact complex 4×4 Dirac algebra in the standard (Dirac) representation.
//!
//! Metric convention is (+,−,−,−) and every momentum is expressed in units of
//! the electron mass, so the mass shell is `q² = 1` with `q⁰ > 0`.
//!
//! The "tilde" conjugation used throughout the propagator layer is complex
//! conjugation that treats the γ-matrices as real: on a polynomial
//! `A = Σ c_I Γ_I` in γ-products it conjugates the coefficients only.  In the
//! Dirac representation γ⁰, γ¹, γ³ are real and γ² is purely imaginary, so the
//! entrywise realization is `Ã = C A* C⁻¹` with `C = γ⁰γ¹γ³` (the unique basis
//! monomial, up to a scalar, that commutes with γ⁰, γ¹, γ³ and anticommutes
//! with γ²).  `C² = −1`, hence the map is an involution.

use num_complex::Complex64;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};
use thiserror::Error;

/// Tolerance on `|q² − 1|` for on-shell preconditions.
pub const ON_SHELL_TOL: f64 = 1e-10;

/// Errors from operations with on-shell preconditions.
#[derive(Debug, Error)]
pub enum DiracError {
    /// The supplied four-vector is off the mass shell beyond [`ON_SHELL_TOL`].
    #[error("four-vector off mass shell: q² − 1 = {excess:.3e} (tolerance {ON_SHELL_TOL:.1e})")]
    OffShell {
        /// `q² − 1` of the offending vector.
        excess: f64,
    },
}

/// Real Minkowski four-vector, metric (+,−,−,−), in electron-mass units.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FourVector {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl FourVector {
    pub const fn new(t: f64, x: f64, y: f64, z: f64) -> Self {
        Self { t, x, y, z }
    }

    /// On-shell vector with spatial part `q` and `q⁰ = +√(𝐪² + 1)`.
    pub fn on_shell(q: [f64; 3]) -> Self {
        let e = (1.0 + q[0] * q[0] + q[1] * q[1] + q[2] * q[2]).sqrt();
        Self::new(e, q[0], q[1], q[2])
    }

    /// Minkowski product `v·w = v⁰w⁰ − 𝐯·𝐰`.
    pub fn dot(self, w: Self) -> f64 {
        self.t * w.t - self.x * w.x - self.y * w.y - self.z * w.z
    }

    /// Minkowski square `v² = (v⁰)² − 𝐯²`.
    pub fn square(self) -> f64 {
        self.dot(self)
    }

    pub fn spatial_norm(self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// Euclidean square `(v⁰)² + 𝐯²` (used by the Gaussian smearing kernels).
    pub fn euclid_square(self) -> f64 {
        self.t * self.t + self.x * self.x + self.y * self.y + self.z * self.z
    }

    fn off_shell_excess(self) -> f64 {
        self.square() - 1.0
    }

    /// Checks `|q² − 1| ≤ tol` and `q⁰ > 0`.
    pub fn check_on_shell(self) -> Result<(), DiracError> {
        let excess = self.off_shell_excess();
        if excess.abs() > ON_SHELL_TOL || self.t <= 0.0 {
            return Err(DiracError::OffShell { excess });
        }
        Ok(())
    }
}

impl Add for FourVector {
    type Output = Self;
    fn add(self, w: Self) -> Self {
        Self::new(self.t + w.t, self.x + w.x, self.y + w.y, self.z + w.z)
    }
}

impl Sub for FourVector {
    type Output = Self;
    fn sub(self, w: Self) -> Self {
        Self::new(self.t - w.t, self.x - w.x, self.y - w.y, self.z - w.z)
    }
}

impl Neg for FourVector {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.t, -self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for FourVector {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self::new(self.t * s, self.x * s, self.y * s, self.z * s)
    }
}

/// Dense complex 4×4 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix4c {
    m: [[Complex64; 4]; 4],
}

const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);

impl Matrix4c {
    pub fn zero() -> Self {
        Self {
            m: [[C_ZERO; 4]; 4],
        }
    }

    pub fn identity() -> Self {
        let mut out = Self::zero();
        for i in 0..4 {
            out.m[i][i] = Complex64::new(1.0, 0.0);
        }
        out
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut out = Self::zero();
        for i in 0..4 {
            for j in 0..4 {
                out.m[i][j] = f(i, j);
            }
        }
        out
    }

    pub fn scale(self, s: Complex64) -> Self {
        Self::from_fn(|i, j| self.m[i][j] * s)
    }

    /// Frobenius norm.
    pub fn norm(self) -> f64 {
        let mut acc = 0.0;
        for row in &self.m {
            for v in row {
                acc += v.norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// Entrywise complex conjugate.
    pub fn conj(self) -> Self {
        Self::from_fn(|i, j| self.m[i][j].conj())
    }

    /// The conjugation that treats γ-matrices as real: `Ã = C A* C⁻¹`,
    /// `C = γ⁰γ¹γ³`, `C⁻¹ = −C`.
    pub fn tilde(self) -> Self {
        let c = tilde_similarity();
        (c * self.conj() * c).scale(Complex64::new(-1.0, 0.0))
    }

    /// Inverse by Gauss–Jordan elimination with partial pivoting.
    /// Returns `None` for (numerically) singular input.
    pub fn inverse(self) -> Option<Self> {
        let mut a = self.m;
        let mut inv = Self::identity().m;
        for col in 0..4 {
            let mut pivot = col;
            for r in col + 1..4 {
                if a[r][col].norm() > a[pivot][col].norm() {
                    pivot = r;
                }
            }
            if a[pivot][col].norm() < 1e-300 {
                return None;
            }
            a.swap(col, pivot);
            inv.swap(col, pivot);
            let d = a[col][col];
            for j in 0..4 {
                a[col][j] /= d;
                inv[col][j] /= d;
            }
            for r in 0..4 {
                if r == col {
                    continue;
                }
                let f = a[r][col];
                if f == C_ZERO {
                    continue;
                }
                for j in 0..4 {
                    let acj = a[col][j];
                    let icj = inv[col][j];
                    a[r][j] -= f * acj;
                    inv[r][j] -= f * icj;
                }
            }
        }
        Some(Self { m: inv })
    }

    /// Right-multiplication by a column bispinor.
    pub fn mul_spinor(self, u: &Bispinor) -> Bispinor {
        let mut c = [C_ZERO; 4];
        for (i, ci) in c.iter_mut().enumerate() {
            for j in 0..4 {
                *ci += self.m[i][j] * u.c[j];
            }
        }
        Bispinor { c }
    }
}

impl Index<(usize, usize)> for Matrix4c {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.m[i][j]
    }
}

impl IndexMut<(usize, usize)> for Matrix4c {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.m[i][j]
    }
}

impl Add for Matrix4c {
    type Output = Self;
    fn add(self, b: Self) -> Self {
        Self::from_fn(|i, j| self.m[i][j] + b.m[i][j])
    }
}

impl Sub for Matrix4c {
    type Output = Self;
    fn sub(self, b: Self) -> Self {
        Self::from_fn(|i, j| self.m[i][j] - b.m[i][j])
    }
}

impl Neg for Matrix4c {
    type Output = Self;
    fn neg(self) -> Self {
        Self::from_fn(|i, j| -self.m[i][j])
    }
}

impl Mul for Matrix4c {
    type Output = Self;
    fn mul(self, b: Self) -> Self {
        let mut out = Self::zero();
        for i in 0..4 {
            for k in 0..4 {
                let aik = self.m[i][k];
                if aik == C_ZERO {
                    continue;
                }
                for j in 0..4 {
                    out.m[i][j] += aik * b.m[k][j];
                }
            }
        }
        out
    }
}

impl Mul<Complex64> for Matrix4c {
    type Output = Self;
    fn mul(self, s: Complex64) -> Self {
        self.scale(s)
    }
}

impl Mul<f64> for Matrix4c {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }
}

/// γ^μ in the Dirac representation. Panics unless `mu ∈ {0,1,2,3}`.
pub fn gamma(mu: usize) -> Matrix4c {
    assert!(mu < 4, "gamma index out of range: {mu}");
    let r = |v: f64| Complex64::new(v, 0.0);
    let i = |v: f64| Complex64::new(0.0, v);
    let rows: [[Complex64; 4]; 4] = match mu {
        0 => [
            [r(1.0), C_ZERO, C_ZERO, C_ZERO],
            [C_ZERO, r(1.0), C_ZERO, C_ZERO],
            [C_ZERO, C_ZERO, r(-1.0), C_ZERO],
            [C_ZERO, C_ZERO, C_ZERO, r(-1.0)],
        ],
        1 => [
            [C_ZERO, C_ZERO, C_ZERO, r(1.0)],
            [C_ZERO, C_ZERO, r(1.0), C_ZERO],
            [C_ZERO, r(-1.0), C_ZERO, C_ZERO],
            [r(-1.0), C_ZERO, C_ZERO, C_ZERO],
        ],
        2 => [
            [C_ZERO, C_ZERO, C_ZERO, i(-1.0)],
            [C_ZERO, C_ZERO, i(1.0), C_ZERO],
            [C_ZERO, i(1.0), C_ZERO, C_ZERO],
            [i(-1.0), C_ZERO, C_ZERO, C_ZERO],
        ],
        _ => [
            [C_ZERO, C_ZERO, r(1.0), C_ZERO],
            [C_ZERO, C_ZERO, C_ZERO, r(-1.0)],
            [r(-1.0), C_ZERO, C_ZERO, C_ZERO],
            [C_ZERO, r(1.0), C_ZERO, C_ZERO],
        ],
    };
    Matrix4c { m: rows }
}

fn tilde_similarity() -> Matrix4c {
    gamma(0) * gamma(1) * gamma(3)
}

/// `v̸ = v_μ γ^μ = v⁰γ⁰ − 𝐯·γ⃗`.
pub fn slash(v: FourVector) -> Matrix4c {
    let mut out = gamma(0) * v.t;
    out = out - gamma(1) * v.x;
    out = out - gamma(2) * v.y;
    out = out - gamma(3) * v.z;
    out
}

/// `γ^ρ X γ_ρ = γ⁰Xγ⁰ − Σᵢ γ^i X γ^i`.
pub fn gamma_contract(x: Matrix4c) -> Matrix4c {
    let mut out = gamma(0) * x * gamma(0);
    for mu in 1..4 {
        out = out - gamma(mu) * x * gamma(mu);
    }
    out
}

/// Spin label of an on-shell bispinor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spin {
    Up,
    Down,
}

/// On-shell bispinor normalized to `ū u = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bispinor {
    pub c: [Complex64; 4],
}

impl Bispinor {
    /// Conjugate row `ū = u† γ⁰` (Dirac representation: lower components flip sign).
    pub fn bar(&self) -> [Complex64; 4] {
        [
            self.c[0].conj(),
            self.c[1].conj(),
            -self.c[2].conj(),
            -self.c[3].conj(),
        ]
    }
}

/// Positive-energy solution `u_σ(𝐪)` of `(q̸ − 1)u = 0`, normalized to `ū u = 1`.
///
/// With `E = q⁰` and Pauli spinor `χ_σ`,
/// `u = ( √((E+1)/2) χ , (σ·𝐪)/√(2(E+1)) χ )ᵀ`.
pub fn spinor_u(q: FourVector, sigma: Spin) -> Result<Bispinor, DiracError> {
    q.check_on_shell()?;
    let e = q.t;
    let upper = ((e + 1.0) / 2.0).sqrt();
    let lower = 1.0 / (2.0 * (e + 1.0)).sqrt();
    // σ·𝐪 = [[q_z, q_x − i q_y], [q_x + i q_y, −q_z]]
    let sq = [
        [
            Complex64::new(q.z, 0.0),
            Complex64::new(q.x, -q.y),
        ],
        [
            Complex64::new(q.x, q.y),
            Complex64::new(-q.z, 0.0),
        ],
    ];
    let chi: [Complex64; 2] = match sigma {
        Spin::Up => [Complex64::new(1.0, 0.0), C_ZERO],
        Spin::Down => [C_ZERO, Complex64::new(1.0, 0.0)],
    };
    let c = [
        chi[0] * upper,
        chi[1] * upper,
        (sq[0][0] * chi[0] + sq[0][1] * chi[1]) * lower,
        (sq[1][0] * chi[0] + sq[1][1] * chi[1]) * lower,
    ];
    Ok(Bispinor { c })
}

/// `ū_{σ'}(𝐪') M u_σ(𝐪)` with both momenta on shell.
pub fn sandwich(
    q_out: FourVector,
    sigma_out: Spin,
    m: &Matrix4c,
    q_in: FourVector,
    sigma_in: Spin,
) -> Result<Complex64, DiracError> {
    let u_out = spinor_u(q_out, sigma_out)?;
    let u_in = spinor_u(q_in, sigma_in)?;
    let mu = m.mul_spinor(&u_in);
    let bar = u_out.bar();
    Ok(bar[0] * mu.c[0] + bar[1] * mu.c[1] + bar[2] * mu.c[2] + bar[3] * mu.c[3])
}
