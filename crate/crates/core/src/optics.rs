//! TM-polarized reflectance of a three-layer Kretschmann stack.
//!
//! Layer 1 is the coupling prism, layer 2 the metal film of thickness `d`,
//! layer 3 the (semi-infinite) analyte. With the tangential wavevector
//! conserved across interfaces, the normal component in layer `l` is
//!
//! ```text
//! k_l = (2π/λ) · sqrt(ε_l − ε_1 sin²θ)      Im(k_l) ≥ 0
//! ```
//!
//! and the p-polarized interface coefficient is
//! `r_lm = (k_l/ε_l − k_m/ε_m) / (k_l/ε_l + k_m/ε_m)`. The film reflectance
//! is the Airy sum of the two interfaces.
//!
//! Angles cross the API in degrees, lengths in nanometres.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative permittivity `ε' + iε''` of a passive medium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexPermittivity {
    real_part: f64,
    imag_part: f64,
}

impl ComplexPermittivity {
    pub fn new(real_part: f64, imag_part: f64) -> Result<Self> {
        if !real_part.is_finite() || !imag_part.is_finite() {
            return Err(Error::invalid("permittivity", "components must be finite"));
        }
        if imag_part < 0.0 {
            return Err(Error::invalid(
                "permittivity",
                format!("imaginary part {imag_part} < 0 describes a gain medium"),
            ));
        }
        Ok(Self {
            real_part,
            imag_part,
        })
    }

    /// Lossless dielectric of refractive index `n`: `ε = n²`.
    pub fn from_index(n: f64) -> Result<Self> {
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::invalid("refractive index", format!("{n} is not positive")));
        }
        Ok(Self {
            real_part: n * n,
            imag_part: 0.0,
        })
    }

    pub fn real_part(&self) -> f64 {
        self.real_part
    }

    pub fn imag_part(&self) -> f64 {
        self.imag_part
    }

    pub fn as_complex(&self) -> Complex64 {
        Complex64::new(self.real_part, self.imag_part)
    }
}

/// One of the three media of the stack, numbered from the illuminated side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Layer {
    Prism = 1,
    Film = 2,
    Analyte = 3,
}

impl Layer {
    pub fn from_index(index: usize) -> Result<Self> {
        match index {
            1 => Ok(Layer::Prism),
            2 => Ok(Layer::Film),
            3 => Ok(Layer::Analyte),
            _ => Err(Error::invalid("layer", format!("{index} is not in {{1, 2, 3}}"))),
        }
    }
}

/// Prism / gold film / analyte stack at a single wavelength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StackModel {
    prism_index: f64,
    gold_permittivity: ComplexPermittivity,
    gold_thickness: f64,
    analyte_index: f64,
    wavelength: f64,
}

impl StackModel {
    pub fn new(
        prism_index: f64,
        gold_permittivity: ComplexPermittivity,
        gold_thickness: f64,
        analyte_index: f64,
        wavelength: f64,
    ) -> Result<Self> {
        if !(prism_index.is_finite() && prism_index > 1.0) {
            return Err(Error::invalid("prism_index", format!("{prism_index} must exceed 1")));
        }
        if gold_permittivity.real_part() >= 0.0 {
            return Err(Error::invalid(
                "gold_permittivity",
                format!(
                    "real part {} is not metallic (must be negative)",
                    gold_permittivity.real_part()
                ),
            ));
        }
        if !(gold_thickness.is_finite() && gold_thickness > 0.0) {
            return Err(Error::invalid("gold_thickness", format!("{gold_thickness} nm must be positive")));
        }
        if !(analyte_index.is_finite() && analyte_index >= 1.0) {
            return Err(Error::invalid("analyte_index", format!("{analyte_index} must be at least 1")));
        }
        if !(wavelength.is_finite() && wavelength > 0.0) {
            return Err(Error::invalid("wavelength", format!("{wavelength} nm must be positive")));
        }
        Ok(Self {
            prism_index,
            gold_permittivity,
            gold_thickness,
            analyte_index,
            wavelength,
        })
    }

    pub fn prism_index(&self) -> f64 {
        self.prism_index
    }

    pub fn gold_permittivity(&self) -> ComplexPermittivity {
        self.gold_permittivity
    }

    pub fn gold_thickness(&self) -> f64 {
        self.gold_thickness
    }

    pub fn analyte_index(&self) -> f64 {
        self.analyte_index
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    /// Same stack with a different analyte.
    pub fn with_analyte_index(&self, analyte_index: f64) -> Result<Self> {
        Self::new(
            self.prism_index,
            self.gold_permittivity,
            self.gold_thickness,
            analyte_index,
            self.wavelength,
        )
    }

    pub fn with_gold(&self, permittivity: ComplexPermittivity, thickness: f64) -> Result<Self> {
        Self::new(
            self.prism_index,
            permittivity,
            thickness,
            self.analyte_index,
            self.wavelength,
        )
    }

    pub fn permittivity(&self, layer: Layer) -> Complex64 {
        match layer {
            Layer::Prism => Complex64::new(self.prism_index * self.prism_index, 0.0),
            Layer::Film => self.gold_permittivity.as_complex(),
            Layer::Analyte => Complex64::new(self.analyte_index * self.analyte_index, 0.0),
        }
    }
}

/// Sampled reflectance curve over increasing incidence angles.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleScan {
    angles: Vec<f64>,
    reflectances: Vec<f64>,
}

impl AngleScan {
    pub fn new(angles: Vec<f64>, reflectances: Vec<f64>) -> Result<Self> {
        if angles.len() != reflectances.len() {
            return Err(Error::invalid(
                "angle scan",
                format!("{} angles but {} reflectances", angles.len(), reflectances.len()),
            ));
        }
        if angles.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("angle scan", "angles must be strictly increasing"));
        }
        if let Some(a) = angles.iter().find(|a| !(0.0..90.0).contains(*a)) {
            return Err(Error::AngleOutOfRange(*a));
        }
        if let Some(r) = reflectances.iter().find(|r| !(0.0..=1.0).contains(*r)) {
            return Err(Error::invalid("angle scan", format!("reflectance {r} outside [0, 1]")));
        }
        Ok(Self {
            angles,
            reflectances,
        })
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn reflectances(&self) -> &[f64] {
        &self.reflectances
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.angles.iter().copied().zip(self.reflectances.iter().copied())
    }
}

fn check_angle(theta_deg: f64) -> Result<f64> {
    if !(0.0..90.0).contains(&theta_deg) {
        return Err(Error::AngleOutOfRange(theta_deg));
    }
    Ok(theta_deg.to_radians())
}

fn wavevector_unchecked(stack: &StackModel, layer: Layer, theta_rad: f64) -> Complex64 {
    let k0 = 2.0 * PI / stack.wavelength;
    let sin = theta_rad.sin();
    let tangential_sq = stack.permittivity(Layer::Prism) * (sin * sin);
    let mut k = (stack.permittivity(layer) - tangential_sq).sqrt() * k0;
    // principal sqrt may land on Im < 0 when the argument has a -0.0 imaginary part
    if k.im < 0.0 {
        k = -k;
    }
    k
}

fn fresnel_unchecked(stack: &StackModel, l: Layer, m: Layer, theta_rad: f64) -> Complex64 {
    let a = wavevector_unchecked(stack, l, theta_rad) / stack.permittivity(l);
    let b = wavevector_unchecked(stack, m, theta_rad) / stack.permittivity(m);
    (a - b) / (a + b)
}

fn reflectance_unchecked(stack: &StackModel, theta_rad: f64) -> f64 {
    let r12 = fresnel_unchecked(stack, Layer::Prism, Layer::Film, theta_rad);
    let r23 = fresnel_unchecked(stack, Layer::Film, Layer::Analyte, theta_rad);
    let k2 = wavevector_unchecked(stack, Layer::Film, theta_rad);
    let phase = (Complex64::i() * 2.0 * k2 * stack.gold_thickness).exp();
    let r = (phase * r23 + r12) / (phase * r23 * r12 + 1.0);
    let reflectance = r.norm_sqr();
    debug_assert!(reflectance <= 1.0 + 1e-9, "reflectance {reflectance} above unity");
    reflectance.clamp(0.0, 1.0)
}

/// Normal component of the wavevector in `layer` (rad/nm), on the decaying branch.
pub fn normal_wavevector(stack: &StackModel, layer: Layer, theta_in: f64) -> Result<Complex64> {
    let theta = check_angle(theta_in)?;
    Ok(wavevector_unchecked(stack, layer, theta))
}

/// p-polarized reflection coefficient `r_lm` of the `l`/`m` interface.
pub fn fresnel_p(stack: &StackModel, l: Layer, m: Layer, theta_in: f64) -> Result<Complex64> {
    if l == m {
        return Err(Error::SameLayer(l));
    }
    let theta = check_angle(theta_in)?;
    Ok(fresnel_unchecked(stack, l, m, theta))
}

/// Kretschmann reflectance `R_sp` at incidence angle `theta_in` (degrees).
pub fn reflectance_spr(stack: &StackModel, theta_in: f64) -> Result<f64> {
    let theta = check_angle(theta_in)?;
    Ok(reflectance_unchecked(stack, theta))
}

/// Uniform sweep of `steps` angles from `theta_min` to `theta_max` inclusive.
pub fn angle_scan(stack: &StackModel, theta_min: f64, theta_max: f64, steps: usize) -> Result<AngleScan> {
    if theta_min.partial_cmp(&theta_max) != Some(std::cmp::Ordering::Less) {
        return Err(Error::invalid(
            "angle range",
            format!("theta_min {theta_min} must be below theta_max {theta_max}"),
        ));
    }
    if steps < 2 {
        return Err(Error::invalid("steps", format!("{steps} < 2")));
    }
    check_angle(theta_min)?;
    check_angle(theta_max)?;
    let angles = linspace(theta_min, theta_max, steps);
    let reflectances = angles
        .iter()
        .map(|&a| reflectance_unchecked(stack, a.to_radians()))
        .collect();
    AngleScan::new(angles, reflectances)
}

/// Central finite difference `∂R_sp/∂n_analyte`, signed.
pub fn sensitivity(stack: &StackModel, theta_in: f64, delta_n: f64) -> Result<f64> {
    if !(delta_n.is_finite() && delta_n > 0.0) {
        return Err(Error::invalid("delta_n", format!("{delta_n} must be positive")));
    }
    let theta = check_angle(theta_in)?;
    let n = stack.analyte_index();
    let upper = stack.with_analyte_index(n + delta_n)?;
    // keep the lower probe physical for analytes sitting at n = 1
    let lower_n = (n - delta_n).max(1.0);
    let lower = stack.with_analyte_index(lower_n)?;
    let diff = reflectance_unchecked(&upper, theta) - reflectance_unchecked(&lower, theta);
    Ok(diff / (n + delta_n - lower_n))
}

/// Default finite-difference step for [`sensitivity`], in RIU.
pub const DEFAULT_INDEX_STEP: f64 = 1e-6;

const COARSE_POINTS: usize = 201;
const ANGLE_TOLERANCE: f64 = 1e-6;

/// Angle of minimum reflectance within `window` (degrees).
///
/// A coarse scan must show a single interior local minimum; it is then
/// refined by golden-section search.
pub fn resonance_angle(stack: &StackModel, window: (f64, f64)) -> Result<f64> {
    let (lo, hi) = window;
    if lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) {
        return Err(Error::invalid("window", format!("[{lo}, {hi}] is empty")));
    }
    check_angle(lo)?;
    check_angle(hi)?;
    minimize_unimodal(|a| reflectance_unchecked(stack, a.to_radians()), lo, hi)
}

/// Minimizer of `f` on `[lo, hi]`, assuming a single interior minimum.
pub(crate) fn minimize_unimodal(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Result<f64> {
    let grid = linspace(lo, hi, COARSE_POINTS);
    let values: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    let minima: Vec<usize> = (1..grid.len() - 1)
        .filter(|&i| values[i] <= values[i - 1] && values[i] < values[i + 1])
        .collect();
    let best = match minima.as_slice() {
        [] => return Err(Error::NoInteriorMinimum { lo, hi }),
        [i] => *i,
        many => {
            return Err(Error::NotUnimodal {
                lo,
                hi,
                count: many.len(),
            })
        }
    };
    let (x_min, _) = golden_section(&f, grid[best - 1], grid[best + 1], ANGLE_TOLERANCE);
    Ok(x_min)
}

fn golden_section(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

pub(crate) fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    let last = (steps - 1) as f64;
    (0..steps)
        .map(|i| {
            if i + 1 == steps {
                hi
            } else {
                lo + (hi - lo) * i as f64 / last
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gold() -> ComplexPermittivity {
        ComplexPermittivity::new(-18.2484, 0.8096).unwrap()
    }

    fn calibrated(n: f64) -> StackModel {
        StackModel::new(1.5106, gold(), 57.41, n, 799.0).unwrap()
    }

    // Branch-explicit square root via polar form, arg taken in [0, π] for Im ≥ 0 inputs.
    fn oracle_wavevector(eps_l: Complex64, eps_1: f64, theta_deg: f64, lambda: f64) -> Complex64 {
        let s = theta_deg.to_radians().sin();
        let z = eps_l - eps_1 * s * s;
        let modulus = (z.re * z.re + z.im * z.im).sqrt();
        let arg = z.im.abs().atan2(z.re);
        let root = Complex64::new(modulus.sqrt() * (arg / 2.0).cos(), modulus.sqrt() * (arg / 2.0).sin());
        root * (2.0 * PI / lambda)
    }

    #[test]
    fn permittivity_rejects_gain() {
        assert!(ComplexPermittivity::new(-10.0, -0.1).is_err());
        let d = ComplexPermittivity::from_index(1.5).unwrap();
        assert_eq!(d.real_part(), 2.25);
        assert_eq!(d.imag_part(), 0.0);
    }

    #[test]
    fn stack_rejects_bad_fields() {
        let dielectric = ComplexPermittivity::new(2.0, 0.0).unwrap();
        assert!(StackModel::new(1.5, dielectric, 50.0, 1.33, 799.0).is_err());
        assert!(StackModel::new(1.0, gold(), 50.0, 1.33, 799.0).is_err());
        assert!(StackModel::new(1.5, gold(), 0.0, 1.33, 799.0).is_err());
        assert!(StackModel::new(1.5, gold(), 50.0, 0.9, 799.0).is_err());
        assert!(StackModel::new(1.5, gold(), 50.0, 1.33, -1.0).is_err());
    }

    #[test]
    fn prism_wavevector_at_normal_incidence() {
        let stack = calibrated(1.3284);
        let k = normal_wavevector(&stack, Layer::Prism, 0.0).unwrap();
        assert!((k.re - 2.0 * PI * 1.5106 / 799.0).abs() < 1e-15);
        assert_eq!(k.im, 0.0);
    }

    #[test]
    fn analyte_wavevector_is_evanescent_beyond_critical_angle() {
        let stack = calibrated(1.3284);
        let k = normal_wavevector(&stack, Layer::Analyte, 67.5).unwrap();
        assert!(k.re.abs() < 1e-15, "{k}");
        assert!(k.im > 0.0);
    }

    #[test]
    fn film_wavevector_matches_polar_oracle() {
        let stack = calibrated(1.3284);
        let k = normal_wavevector(&stack, Layer::Film, 67.5).unwrap();
        let expect = oracle_wavevector(gold().as_complex(), 1.5106 * 1.5106, 67.5, 799.0);
        assert!(((k.re - expect.re) / expect.re).abs() < 1e-12);
        assert!(((k.im - expect.im) / expect.im).abs() < 1e-12);
    }

    #[test]
    fn wavevector_rejects_grazing_angles() {
        let stack = calibrated(1.3284);
        assert_eq!(
            normal_wavevector(&stack, Layer::Prism, 90.0),
            Err(Error::AngleOutOfRange(90.0))
        );
        assert!(normal_wavevector(&stack, Layer::Prism, -1.0).is_err());
    }

    #[test]
    fn fresnel_identical_media_and_same_layer() {
        let stack = calibrated(1.5106);
        let r = fresnel_p(&stack, Layer::Prism, Layer::Analyte, 30.0).unwrap();
        assert_eq!(r.norm(), 0.0);
        assert_eq!(
            fresnel_p(&stack, Layer::Film, Layer::Film, 30.0),
            Err(Error::SameLayer(Layer::Film))
        );
    }

    #[test]
    fn fresnel_total_internal_reflection() {
        let stack = calibrated(1.3284);
        let r = fresnel_p(&stack, Layer::Prism, Layer::Analyte, 67.5).unwrap();
        assert!((r.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn vanishing_film_reduces_to_single_interface() {
        let stack = StackModel::new(1.5106, gold(), 1e-9, 1.3284, 799.0).unwrap();
        for theta in [0.0, 20.0, 45.0, 61.0, 67.5, 80.0, 89.0] {
            let r13 = fresnel_p(&stack, Layer::Prism, Layer::Analyte, theta).unwrap();
            let r = reflectance_spr(&stack, theta).unwrap();
            assert!((r - r13.norm_sqr()).abs() < 1e-6, "theta {theta}");
        }
    }

    #[test]
    fn calibrated_dip_inside_scan_window() {
        let scan = angle_scan(&calibrated(1.3284), 66.5, 69.0, 2501).unwrap();
        let (imin, _) = scan
            .reflectances()
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        assert!(imin > 0 && imin < scan.len() - 1);
    }

    #[test]
    fn two_step_scan_hits_endpoints() {
        let stack = calibrated(1.3284);
        let scan = angle_scan(&stack, 66.5, 69.0, 2).unwrap();
        assert_eq!(scan.angles(), &[66.5, 69.0]);
        assert_eq!(scan.reflectances()[0], reflectance_spr(&stack, 66.5).unwrap());
        assert_eq!(scan.reflectances()[1], reflectance_spr(&stack, 69.0).unwrap());
        assert!(angle_scan(&stack, 69.0, 66.5, 10).is_err());
        assert!(angle_scan(&stack, 66.5, 69.0, 1).is_err());
    }

    #[test]
    fn coarse_scan_is_unimodal() {
        let scan = angle_scan(&calibrated(1.3284), 66.5, 69.0, 26).unwrap();
        let r = scan.reflectances();
        let turn = (1..r.len()).find(|&i| r[i] > r[i - 1]).unwrap();
        assert!(turn > 1);
        assert!(r[..turn].windows(2).all(|w| w[1] < w[0]));
        assert!(r[turn - 1..].windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn air_analyte_is_off_resonance() {
        let scan = angle_scan(&calibrated(1.0), 66.5, 69.0, 26).unwrap();
        assert!(scan.reflectances().iter().all(|&r| r > 0.9));
    }

    #[test]
    fn sensitivity_flat_off_resonance() {
        // below the air critical angle (41.4°); 45° sits on the air dip at ~43°
        let s = sensitivity(&calibrated(1.0), 30.0, DEFAULT_INDEX_STEP).unwrap();
        let coarse = sensitivity(&calibrated(1.0), 30.0, 1e-4).unwrap();
        assert!(s.abs() < 1e-2, "{s}");
        assert!((s - coarse).abs() < 1e-4);
    }

    #[test]
    fn sensitivity_positive_on_rising_flank() {
        for n in [1.3284, 1.3300, 1.3325] {
            let s = sensitivity(&calibrated(n), 67.5, DEFAULT_INDEX_STEP).unwrap();
            assert!(s > 10.0, "n {n}: {s}");
            let half = sensitivity(&calibrated(n), 67.5, DEFAULT_INDEX_STEP / 2.0).unwrap();
            assert!(((s - half) / s).abs() < 1e-4);
        }
    }

    #[test]
    fn golden_section_on_synthetic_parabola() {
        let x = minimize_unimodal(|x| (x - 1.2345).powi(2) + 3.0, 0.0, 2.0).unwrap();
        assert!((x - 1.2345).abs() < 1e-4);
        assert!(matches!(
            minimize_unimodal(|x| x, 0.0, 1.0),
            Err(Error::NoInteriorMinimum { .. })
        ));
        assert!(matches!(
            minimize_unimodal(|x: f64| (6.0 * x).cos(), 0.0, 10.0),
            Err(Error::NotUnimodal { .. })
        ));
    }

    #[test]
    fn resonance_shifts_with_index() {
        let a = resonance_angle(&calibrated(1.3284), (66.5, 69.0)).unwrap();
        let b = resonance_angle(&calibrated(1.3325), (66.5, 69.0)).unwrap();
        assert!(66.5 < a && a < b && b < 69.0);
        assert!(matches!(
            resonance_angle(&calibrated(1.0), (66.5, 69.0)),
            Err(Error::NoInteriorMinimum { .. })
        ));
    }
}
