//! Characteristic-matrix (Abelès) reflectance for a single absorbing film,
//! p polarization. Written from the textbook 2×2 method without touching the
//! library's closed-form Airy sum.

use num_complex::Complex64;

/// `|r_p|²` for ambient index `n1` (real), film permittivity `eps2`,
/// film thickness `d` (nm), substrate index `n3`, at `theta_deg` and `lambda` (nm).
pub fn reflectance_tm(n1: f64, eps2: Complex64, d: f64, n3: f64, theta_deg: f64, lambda: f64) -> f64 {
    let eps1 = Complex64::new(n1 * n1, 0.0);
    let eps3 = Complex64::new(n3 * n3, 0.0);
    let beta_sq = eps1 * theta_deg.to_radians().sin().powi(2);
    // cosine-weighted admittances for TM: eta_j = eps_j / sqrt(eps_j - beta²)
    let root = |eps: Complex64| {
        let z = (eps - beta_sq).sqrt();
        if z.im < 0.0 { -z } else { z }
    };
    let (c1, c2, c3) = (root(eps1), root(eps2), root(eps3));
    let eta1 = eps1 / c1;
    let eta2 = eps2 / c2;
    let eta3 = eps3 / c3;
    let delta = c2 * (2.0 * std::f64::consts::PI * d / lambda);
    let i = Complex64::i();
    let m11 = delta.cos();
    let m12 = -i * delta.sin() / eta2;
    let m21 = -i * eta2 * delta.sin();
    let m22 = delta.cos();
    let b = m11 + m12 * eta3;
    let c = m21 + m22 * eta3;
    let r = (eta1 * b - c) / (eta1 * b + c);
    r.norm_sqr()
}
