//! Numerical integration backbone.
//!
//! * adaptive 1D quadrature for complex-valued radial integrands whose
//!   denominators are ε-shifted off the real axis (never principal values:
//!   callers regularize poles physically before integrating);
//! * product Gauss–Legendre × trapezoid averaging over photon directions
//!   `k̂ = (1, sinθcosφ, sinθsinφ, cosθ)`;
//! * the ordered-scale report validating `ε ≪ mT`, `ε/m ≪ λ ≪ T ≪ Λ ≪ m`.
//!
//! The adaptive driver is interval bisection with a 15-point Gauss–Legendre
//! rule per interval and a worst-first heap; all node tables are generated by
//! Newton iteration on the Legendre/Hermite recurrences, so results are
//! deterministic bit-for-bit for a fixed configuration.

use crate::exec;
use crate::params::ThermalParams;
use num_complex::Complex64;
use std::collections::BinaryHeap;
use thiserror::Error;

/// Value, error estimate and cost of a numerical integral.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: Complex64,
    pub abs_err: f64,
    pub evals: u64,
}

/// Quadrature failure modes. `BudgetExceeded` carries the best estimate.
#[derive(Debug, Error)]
pub enum QuadError {
    #[error(
        "tolerance not reached within budget: best value {value}, err {abs_err:.3e} after {evals} evaluations"
    )]
    BudgetExceeded {
        value: Complex64,
        abs_err: f64,
        evals: u64,
    },
    #[error("invalid interval [{a}, {b}]")]
    BadInterval { a: f64, b: f64 },
    #[error("integrand returned a non-finite value near x = {x}")]
    NonFinite { x: f64 },
}

/// Tolerances and evaluation budget.
#[derive(Debug, Clone, Copy)]
pub struct QuadOpts {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub budget: u64,
}

impl Default for QuadOpts {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-300,
            budget: 2_000_000,
        }
    }
}

impl QuadOpts {
    pub fn with_rel_tol(mut self, tol: f64) -> Self {
        self.rel_tol = tol;
        self
    }
}

const GL_ORDER: usize = 15;

/// Gauss–Legendre nodes and weights on (−1, 1), by Newton iteration on the
/// three-term recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-like initial guess, then a fixed number of Newton steps.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                let (p2, d2) = legendre_and_derivative(n, x);
                dp = d2;
                x -= p2 / d2;
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Hermite nodes and weights for `∫ e^{−x²} f(x) dx`.
///
/// Roots found by interlacing bisection on the orthonormal recurrence
/// (the roots of consecutive orthogonal polynomials interlace), followed by
/// Newton polish; robust for every order used here.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut roots = vec![0.0f64]; // root of the degree-1 polynomial
    for k in 2..=n {
        let bound = (2.0 * k as f64 + 1.0).sqrt();
        let mut pts = Vec::with_capacity(k + 1);
        pts.push(-bound);
        pts.extend(roots.iter().copied());
        pts.push(bound);
        let mut next = Vec::with_capacity(k);
        for w in pts.windows(2) {
            next.push(hermite_root_in(k, w[0], w[1]));
        }
        roots = next;
    }
    let weights: Vec<f64> = roots
        .iter()
        .map(|&x| {
            let (_, d) = hermite_and_derivative(n, x);
            2.0 / (d * d)
        })
        .collect();
    (roots, weights)
}

fn hermite_root_in(n: usize, mut lo: f64, mut hi: f64) -> f64 {
    let flo = hermite_and_derivative(n, lo).0;
    for _ in 0..90 {
        let mid = 0.5 * (lo + hi);
        let fm = hermite_and_derivative(n, mid).0;
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..4 {
        let (p, d) = hermite_and_derivative(n, x);
        x -= p / d;
    }
    x
}

/// Orthonormal Hermite function value and derivative.
fn hermite_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let pim4 = 0.751_125_544_464_942_6; // π^{-1/4}
    let mut p1 = pim4;
    let mut p2 = 0.0;
    for j in 1..=n {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = x * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
    }
    let d = (2.0 * n as f64).sqrt() * p2;
    (p1, d)
}

struct Interval {
    a: f64,
    b: f64,
    value: Complex64,
    err: f64,
    seq: u64,
}

impl PartialEq for Interval {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err && self.seq == other.seq
    }
}
impl Eq for Interval {}
impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Interval {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // worst error first; sequence number breaks ties deterministically
        self.err
            .total_cmp(&other.err)
            .then(self.seq.cmp(&other.seq))
    }
}

fn gl15_panel(f: &impl Fn(f64) -> Complex64, a: f64, b: f64) -> (Complex64, f64) {
    thread_local! {
        static RULE: (Vec<f64>, Vec<f64>) = gauss_legendre(GL_ORDER);
    }
    RULE.with(|(x, w)| {
        let h = 0.5 * (b - a);
        let c = 0.5 * (a + b);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut mag = 0.0;
        for i in 0..GL_ORDER {
            let v = f(c + h * x[i]);
            acc += v * w[i];
            mag += v.norm() * w[i];
        }
        (acc * h, mag * h.abs())
    })
}

/// Adaptive integration of a complex integrand over `[a, b]`.
///
/// The integrand must be finite on the open interval; poles must be ε-shifted
/// off the real axis by the caller.
pub fn integrate(
    f: impl Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    opts: QuadOpts,
) -> Result<QuadResult, QuadError> {
    integrate_with_breaks(f, &[a, b], opts)
}

/// Adaptive integration over the union of consecutive panels given by
/// `points` (sorted ascending). Breakpoints let callers pre-split around
/// known quasi-singular scales such as `κ ~ ε`.
pub fn integrate_with_breaks(
    f: impl Fn(f64) -> Complex64,
    points: &[f64],
    opts: QuadOpts,
) -> Result<QuadResult, QuadError> {
    if points.len() < 2 {
        return Err(QuadError::BadInterval {
            a: f64::NAN,
            b: f64::NAN,
        });
    }
    for w in points.windows(2) {
        if !(w[0] < w[1]) {
            return Err(QuadError::BadInterval { a: w[0], b: w[1] });
        }
    }

    let mut heap = BinaryHeap::new();
    let mut evals = 0u64;
    let mut seq = 0u64;
    let push = |heap: &mut BinaryHeap<Interval>,
                    evals: &mut u64,
                    seq: &mut u64,
                    a: f64,
                    b: f64|
     -> Result<(), QuadError> {
        let (coarse, _) = gl15_panel(&f, a, b);
        let mid = 0.5 * (a + b);
        let (left, _) = gl15_panel(&f, a, mid);
        let (right, _) = gl15_panel(&f, mid, b);
        *evals += 3 * GL_ORDER as u64;
        let refined = left + right;
        if !refined.is_finite() {
            return Err(QuadError::NonFinite { x: mid });
        }
        let err = (refined - coarse).norm();
        heap.push(Interval {
            a,
            b,
            value: refined,
            err,
            seq: *seq,
        });
        *seq += 1;
        Ok(())
    };

    for w in points.windows(2) {
        push(&mut heap, &mut evals, &mut seq, w[0], w[1])?;
    }

    loop {
        let total: Complex64 = heap
            .iter()
            .fold(Complex64::new(0.0, 0.0), |acc, iv| acc + iv.value);
        let total_err: f64 = heap.iter().map(|iv| iv.err).sum();
        let tol = (opts.rel_tol * total.norm()).max(opts.abs_tol);
        if total_err <= tol {
            return Ok(QuadResult {
                value: total,
                abs_err: total_err,
                evals,
            });
        }
        if evals >= opts.budget {
            return Err(QuadError::BudgetExceeded {
                value: total,
                abs_err: total_err,
                evals,
            });
        }
        let worst = heap.pop().expect("heap non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval at floating-point resolution; freeze it
            let mut frozen = worst;
            frozen.err = 0.0;
            heap.push(frozen);
            continue;
        }
        push(&mut heap, &mut evals, &mut seq, worst.a, mid)?;
        push(&mut heap, &mut evals, &mut seq, mid, worst.b)?;
    }
}

/// Semi-infinite integral `∫_a^∞ f` via the rational map `κ = a/(1 − u)`,
/// `u ∈ (0, 1)`. Requires `a > 0` and an integrand decaying at infinity
/// (Bose tails are cut by the caller at `βκ ≈ 45`, below double precision).
pub fn integrate_to_inf(
    f: impl Fn(f64) -> Complex64,
    a: f64,
    opts: QuadOpts,
) -> Result<QuadResult, QuadError> {
    assert!(a > 0.0, "integrate_to_inf requires a positive lower limit");
    let g = |u: f64| {
        let kappa = a / (1.0 - u);
        let jac = a / ((1.0 - u) * (1.0 - u));
        f(kappa) * jac
    };
    integrate(g, 0.0, 1.0, opts)
}

/// Unit photon four-vector `k̂ = (1, sinθcosφ, sinθsinφ, cosθ)`.
pub fn khat(cos_theta: f64, phi: f64) -> crate::diracalg::FourVector {
    let sin_theta = (1.0 - cos_theta * cos_theta).max(0.0).sqrt();
    crate::diracalg::FourVector::new(
        1.0,
        sin_theta * phi.cos(),
        sin_theta * phi.sin(),
        cos_theta,
    )
}

/// Fixed angular orders for the direction average.
#[derive(Debug, Clone, Copy)]
pub struct AngularOpts {
    pub n_cos: usize,
    pub n_phi: usize,
}

impl Default for AngularOpts {
    fn default() -> Self {
        Self { n_cos: 32, n_phi: 16 }
    }
}

/// Direction average `⟨f⟩ = ∫ dΩ/4π f(cosθ, φ)`: Gauss–Legendre in `cosθ`
/// times the periodic trapezoid rule in `φ`. The error estimate compares
/// against the half-order rule. Node evaluations run through [`exec`] and are
/// reduced in fixed order.
pub fn angular_average(
    f: impl Fn(f64, f64) -> Complex64 + Sync,
    opts: AngularOpts,
) -> QuadResult {
    let fine = angular_pass(&f, opts.n_cos, opts.n_phi);
    let coarse = angular_pass(&f, (opts.n_cos / 2).max(2), (opts.n_phi / 2).max(1));
    QuadResult {
        value: fine,
        abs_err: (fine - coarse).norm(),
        evals: (opts.n_cos * opts.n_phi + (opts.n_cos / 2).max(2) * (opts.n_phi / 2).max(1))
            as u64,
    }
}

fn angular_pass(
    f: &(impl Fn(f64, f64) -> Complex64 + Sync),
    n_cos: usize,
    n_phi: usize,
) -> Complex64 {
    let (nodes, weights) = gauss_legendre(n_cos);
    let vals = exec::map_collect(n_cos * n_phi, |idx| {
        let i = idx / n_phi;
        let j = idx % n_phi;
        let phi = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / n_phi as f64;
        f(nodes[i], phi) * weights[i]
    });
    // ⟨f⟩ = (1/4π) Σ w_i (2π/n_phi) f = (1/2) Σ w_i f / n_phi
    exec::sum_complex(&vals) * (0.5 / n_phi as f64)
}

/// One inequality of the scale hierarchy.
#[derive(Debug, Clone)]
pub struct ScaleEntry {
    pub name: &'static str,
    pub ratio: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Ordered-scale report for the hierarchy `ε ≪ mT`, `ε/m ≪ λ ≪ T ≪ Λ ≪ m`,
/// with `≪` meaning `ratio ≤ factor`.
#[derive(Debug, Clone)]
pub struct ScaleReport {
    pub factor: f64,
    pub entries: Vec<ScaleEntry>,
}

impl ScaleReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn first_failure(&self) -> Option<&ScaleEntry> {
        self.entries.iter().find(|e| !e.pass)
    }
}

/// Hierarchy violation, reporting the worst offending ratio.
#[derive(Debug, Error)]
#[error("scale hierarchy violated: {name} ratio {ratio:.3e} exceeds factor {factor:.1e}")]
pub struct HierarchyError {
    pub name: &'static str,
    pub ratio: f64,
    pub factor: f64,
}

/// Default separation factor for `≪` comparisons.
pub const DEFAULT_SCALE_FACTOR: f64 = 1e-2;

/// Verifies the ε-scheme scale ordering and reports every ratio;
/// fails loudly with the first offending entry.
///
/// The soft-cutoff leg `Λ ≪ m` is graded at `√factor`: the window
/// `T ≪ Λ ≪ m` is only `m/T` wide in total, so at `βm = 10³` it cannot
/// support a full `factor` on both sides simultaneously.
pub fn scale_check(p: &ThermalParams, factor: f64) -> Result<ScaleReport, HierarchyError> {
    let t = p.temperature();
    let entries = vec![
        entry("eps << m*T", p.eps / t, factor),
        entry("eps/m << lambda", p.eps / p.lambda_mid, factor),
        entry("lambda << T", p.lambda_mid / t, factor),
        entry("T << Lambda", t / p.cutoff, factor),
        entry("Lambda << m", p.cutoff, factor.sqrt()),
    ];
    finish_report(entries, factor)
}

/// The cutoff-scheme ordering `λ_w ≪ λ₀ ≪ T ≪ Λ ≪ m`, with `λ_w` the
/// smearing width actually in use.
pub fn scale_check_lambda_scheme(
    p: &ThermalParams,
    smear_width: f64,
    factor: f64,
) -> Result<ScaleReport, HierarchyError> {
    let t = p.temperature();
    let entries = vec![
        entry("smear width << lambda0", smear_width / p.lambda0, factor),
        entry("lambda0 << T", p.lambda0 / t, factor),
        entry("T << Lambda", t / p.cutoff, factor),
        entry("Lambda << m", p.cutoff, factor.sqrt()),
    ];
    finish_report(entries, factor)
}

fn entry(name: &'static str, ratio: f64, threshold: f64) -> ScaleEntry {
    ScaleEntry {
        name,
        ratio,
        threshold,
        pass: ratio <= threshold,
    }
}

fn finish_report(entries: Vec<ScaleEntry>, factor: f64) -> Result<ScaleReport, HierarchyError> {
    let report = ScaleReport { factor, entries };
    match report.first_failure() {
        None => Ok(report),
        Some(e) => Err(HierarchyError {
            name: e.name,
            ratio: e.ratio,
            factor: e.threshold,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diracalg::FourVector;
    use crate::EULER_GAMMA;
    use num_complex::Complex64;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn constant_integrates_exactly() {
        let r = integrate(|_| re(1.0), 0.0, 1.0, QuadOpts::default()).unwrap();
        assert!((r.value.re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let (x, w) = gauss_legendre(8);
        // degree 15 polynomial x^14 over (−1,1): 2/15
        let s: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn gauss_hermite_moments() {
        let (x, w) = gauss_hermite(20);
        let m0: f64 = w.iter().sum();
        let m2: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi * xi).sum();
        let sqrt_pi = std::f64::consts::PI.sqrt();
        assert!((m0 - sqrt_pi).abs() < 1e-12);
        assert!((m2 - 0.5 * sqrt_pi).abs() < 1e-12);
    }

    /// `∫₀^λ dκ/((2κa−iε)(2κb+iε))`, exact:
    /// `[Log((2λa−iε)/(2λb+iε)) + iπ] / (2iε(a+b))`.
    pub(crate) fn pair_pole_closed(a: f64, b: f64, eps: f64, lam: f64) -> Complex64 {
        let num = Complex64::new(2.0 * lam * a, -eps);
        let den = Complex64::new(2.0 * lam * b, eps);
        ((num / den).ln() + Complex64::new(0.0, std::f64::consts::PI))
            / (Complex64::new(0.0, 2.0 * eps) * (a + b))
    }

    #[test]
    fn nearly_singular_pair_pole_matches_closed_form() {
        let (a, b, eps, lam) = (1.0, 1.0, 1e-6, 1e-2);
        let f = |k: f64| {
            1.0 / (Complex64::new(2.0 * k * a, -eps) * Complex64::new(2.0 * k * b, eps))
        };
        let breaks = [0.0, eps, 10.0 * eps, 1e3 * eps, lam];
        let num = integrate_with_breaks(f, &breaks, QuadOpts::default()).unwrap();
        // truncated closed form from the same family
        let approx = std::f64::consts::PI / (2.0 * eps) / (a + b) - 1.0 / (4.0 * lam * a * b);
        let exact = pair_pole_closed(a, b, eps, lam);
        assert!(
            (num.value - exact).norm() <= 1e-7 * exact.norm(),
            "num {} vs exact {}",
            num.value,
            exact
        );
        assert!((num.value.re - approx).abs() <= (eps / lam / lam) * 10.0 + 1e-7 * approx.abs());
    }

    /// High-precision oracle for the Bose tail `∫_λ^∞ 2dκ/(κ(e^{βκ}−1))`
    /// against the small-βλ closed form `2/(βλ) + ln(βλ) + γ − ln 2π`.
    #[test]
    fn bose_tail_matches_closed_form() {
        let beta = 1.0;
        let lam = 1e-3;
        let f = |k: f64| {
            if beta * k > 45.0 {
                re(0.0)
            } else {
                re(2.0 / (k * (beta * k).exp_m1()))
            }
        };
        let num = integrate_with_breaks(
            f,
            &[lam, 1e-2, 1e-1, 1.0, 50.0 / beta],
            QuadOpts::default().with_rel_tol(1e-11),
        )
        .unwrap();
        let closed =
            2.0 / (beta * lam) + (beta * lam).ln() + EULER_GAMMA - (2.0 * std::f64::consts::PI).ln();
        let diff = (num.value.re - closed).abs();
        assert!(diff < 2.0 * beta * lam, "difference {diff:.3e} not O(βλ)");
    }

    #[test]
    fn angular_average_constant_and_rest_frame() {
        let r = angular_average(|_, _| re(1.0), AngularOpts::default());
        assert!((r.value.re - 1.0).abs() < 1e-13);
        // ⟨1/(k̂·q)⟩ at q = (1,0,0,0) is 1
        let q = FourVector::on_shell([0.0; 3]);
        let r = angular_average(|c, p| re(1.0) / khat(c, p).dot(q), AngularOpts::default());
        assert!((r.value.re - 1.0).abs() < 1e-13);
    }

    #[test]
    fn angular_average_moving_frame_log_form() {
        let qmag: f64 = 0.1;
        let q0 = (1.0f64 + qmag * qmag).sqrt();
        let q = FourVector::new(q0, 0.0, 0.0, qmag);
        let r = angular_average(|c, p| re(1.0) / khat(c, p).dot(q), AngularOpts::default());
        let closed = ((q0 + qmag) / (q0 - qmag)).ln() / (2.0 * qmag);
        assert!((r.value.re - closed).abs() < 1e-12 * closed);
        // and ⟨1/a²⟩ = 1/q² exactly on shell
        let r2 = angular_average(
            |c, p| {
                let a = khat(c, p).dot(q);
                re(1.0) / (a * a)
            },
            AngularOpts::default(),
        );
        assert!((r2.value.re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn angular_error_decreases_with_order() {
        let qmag: f64 = 0.3;
        let q0 = (1.0f64 + qmag * qmag).sqrt();
        let q = FourVector::new(q0, 0.0, 0.0, qmag);
        let closed = ((q0 + qmag) / (q0 - qmag)).ln() / (2.0 * qmag);
        let mut last = f64::INFINITY;
        for n in [4, 8, 16] {
            let r = angular_average(
                |c, p| re(1.0) / khat(c, p).dot(q),
                AngularOpts { n_cos: n, n_phi: 8 },
            );
            let err = (r.value.re - closed).abs();
            assert!(err <= last * 1.5, "order {n}: {err} vs {last}");
            last = err;
        }
    }

    #[test]
    fn semi_infinite_map() {
        // ∫_1^∞ dκ/κ² = 1
        let r = integrate_to_inf(|k| re(1.0 / (k * k)), 1.0, QuadOpts::default()).unwrap();
        assert!((r.value.re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn budget_error_carries_best_estimate() {
        let opts = QuadOpts {
            rel_tol: 1e-16,
            abs_tol: 0.0,
            budget: 500,
        };
        let err = integrate(|x| re((1e6 * x).sin() / (x + 1e-3)), 0.0, 1.0, opts).unwrap_err();
        match err {
            QuadError::BudgetExceeded { evals, .. } => assert!(evals >= 500),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn scale_check_default_passes_and_fails() {
        let p = ThermalParams::default();
        let rep = scale_check(&p, DEFAULT_SCALE_FACTOR).unwrap();
        assert!(rep.passed());
        assert_eq!(rep.entries.len(), 5);

        let bad_eps = ThermalParams {
            eps: 1e-2,
            ..Default::default()
        };
        let e = scale_check(&bad_eps, DEFAULT_SCALE_FACTOR).unwrap_err();
        assert_eq!(e.name, "eps << m*T");

        let bad_lambda = ThermalParams {
            lambda_mid: 1e-2,
            ..Default::default()
        };
        let e = scale_check(&bad_lambda, DEFAULT_SCALE_FACTOR).unwrap_err();
        assert_eq!(e.name, "lambda << T");
    }
}
