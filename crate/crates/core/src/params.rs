//! Scenario parameters shared by every computation, in electron-mass units.

use crate::diracalg::FourVector;

/// Which infrared regularization a result was computed under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeTag {
    /// Pole shift `m² − k² − iε` of the electron propagator.
    Epsilon,
    /// Infrared momentum cutoff `λ₀` plus Gaussian vertex smearing.
    Lambda,
}

impl SchemeTag {
    pub fn as_str(self) -> &'static str {
        match self {
            SchemeTag::Epsilon => "epsilon",
            SchemeTag::Lambda => "lambda",
        }
    }
}

/// Scenario bundle. All scales are in units of the electron mass (`m = 1`);
/// `beta` is the inverse temperature `1/T` in units `1/m`.
///
/// The source electron carries spatial momentum `q`; `p` is the spatial
/// momentum transfer.  `p⁰` is never free: the nonrelativistic dispersion of
/// the source fixes `p⁰ = (𝐪+𝐩)²/2 − 𝐪²/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalParams {
    /// Inverse temperature β = 1/T (units 1/m).
    pub beta: f64,
    /// Coupling e, with α = e²/4π.
    pub e: f64,
    /// Pole-shift regulator ε (units m²).
    pub eps: f64,
    /// Soft cutoff Λ separating soft photons, T ≪ Λ ≪ m.
    pub cutoff: f64,
    /// Infrared momentum cutoff λ₀ of the cutoff-plus-smearing scheme.
    pub lambda0: f64,
    /// Auxiliary intermediate scale λ, ε/m ≪ λ ≪ T.
    pub lambda_mid: f64,
    /// Spatial momentum of the source electron.
    pub q: [f64; 3],
    /// Spatial momentum transfer.
    pub p: [f64; 3],
}

impl ThermalParams {
    /// On-shell source momentum `q`.
    pub fn q4(&self) -> FourVector {
        FourVector::on_shell(self.q)
    }

    /// On-shell outgoing momentum `q + p`.
    pub fn q_out4(&self) -> FourVector {
        FourVector::on_shell(self.q_plus_p())
    }

    /// Momentum transfer with `p⁰` from the nonrelativistic dispersion.
    pub fn p4(&self) -> FourVector {
        let qp = self.q_plus_p();
        let p0 = 0.5 * (sq3(qp) - sq3(self.q));
        FourVector::new(p0, self.p[0], self.p[1], self.p[2])
    }

    /// Minkowski `p²` with both electron legs exactly on shell, i.e.
    /// `(q_out − q_in)²`.  Equals `−𝐩²` up to nonrelativistic corrections.
    pub fn p_square_onshell(&self) -> f64 {
        (self.q_out4() - self.q4()).square()
    }

    pub fn q_plus_p(&self) -> [f64; 3] {
        [
            self.q[0] + self.p[0],
            self.q[1] + self.p[1],
            self.q[2] + self.p[2],
        ]
    }

    /// Temperature T = 1/β.
    pub fn temperature(&self) -> f64 {
        1.0 / self.beta
    }

    /// Fine-structure combination α = e²/4π.
    pub fn alpha(&self) -> f64 {
        self.e * self.e / (4.0 * std::f64::consts::PI)
    }

    /// With a momentum transfer of magnitude `p` along z and everything else
    /// unchanged.
    pub fn with_p_z(mut self, p: f64) -> Self {
        self.p = [0.0, 0.0, p];
        self
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn with_lambda0(mut self, lambda0: f64) -> Self {
        self.lambda0 = lambda0;
        self
    }
}

impl Default for ThermalParams {
    /// Desk-scale default: βm = 10³, α = 1/137.036, ε = 10⁻⁸ m²,
    /// Λ = 0.1 m, λ₀ = 10⁻⁵ m (βλ₀ = 10⁻²), λ = 10⁻⁵ m, source at rest,
    /// transfer 0.01 m along z.
    fn default() -> Self {
        Self {
            beta: 1e3,
            e: (4.0 * std::f64::consts::PI / 137.036).sqrt(),
            eps: 1e-8,
            cutoff: 0.1,
            lambda0: 1e-5,
            lambda_mid: 1e-5,
            q: [0.0; 3],
            p: [0.0, 0.0, 0.01],
        }
    }
}

fn sq3(v: [f64; 3]) -> f64 {
    v[0] * v[0] + v[1] * v[1] + v[2] * v[2]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p0_from_dispersion() {
        let p = ThermalParams {
            q: [0.0, 0.0, 0.0],
            p: [0.0, 0.0, 0.1],
            ..Default::default()
        };
        let p4 = p.p4();
        assert!((p4.t - 0.005).abs() < 1e-15);
        // exact on-shell transfer deviates from the dispersion value at O(p⁴)
        let exact = p.q_out4().t - p.q4().t;
        assert!((p4.t - exact).abs() < 2e-5);
    }

    #[test]
    fn onshell_p_square_is_minus_p2_to_leading_order() {
        let p = ThermalParams {
            p: [0.0, 0.0, 0.05],
            ..Default::default()
        };
        let ps = p.p_square_onshell();
        assert!((ps + 0.0025).abs() < 1e-5, "{ps}");
    }
}
