//! Transverse photon-density profiles: the analytic split/broadened Gaussian
//! expressions and exact binning of beam ensembles onto a one-sided detector
//! histogram.

use std::f64::consts::{FRAC_PI_2, SQRT_2};
use std::io::{self, Write};

use statrs::function::erf::{erf, erfc};

use crate::cavity::BeamEnsemble;
use crate::error::{invalid, Error, Result};
use crate::format_sci;

/// Default peak amplitude scale (photons/s).
pub const DEFAULT_AMPLITUDE: f64 = 5e18;
/// Default beam waist at the detector (m).
pub const DEFAULT_WAIST: f64 = 7.5e-4;
/// Height × base / 2 of the triangle used by the single-pass estimate.
pub const TRIANGLE_AMPLITUDE: f64 = 5.0 / 6.0 * 1e18;
/// Largest alpha/r or epsilon/r accepted by the expanded deficit forms.
pub const EXPANSION_LIMIT: f64 = 0.1;
/// Extra reach of the sideband window beyond `w0 + 3·w0` (m).
pub const SIDEBAND_EXTRA: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianProfile {
    pub amplitude: f64,
    pub waist: f64,
    pub center: f64,
}

impl GaussianProfile {
    pub fn new(amplitude: f64, waist: f64, center: f64) -> Result<Self> {
        if !(amplitude > 0.0) || !(waist > 0.0) || !amplitude.is_finite() || !waist.is_finite() {
            return Err(invalid(format!(
                "profile needs amplitude > 0 and waist > 0, got A={amplitude}, r={waist}"
            )));
        }
        if !center.is_finite() {
            return Err(invalid("profile center must be finite"));
        }
        Ok(GaussianProfile {
            amplitude,
            waist,
            center,
        })
    }

    /// Integral of the profile over the whole line, `A·r·√(2π)`.
    pub fn total(&self) -> f64 {
        self.amplitude * self.waist * (2.0 * std::f64::consts::PI).sqrt()
    }
}

impl Default for GaussianProfile {
    fn default() -> Self {
        GaussianProfile {
            amplitude: DEFAULT_AMPLITUDE,
            waist: DEFAULT_WAIST,
            center: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitProfileParams {
    /// Displacement of each half-beam centre (m).
    pub alpha: f64,
    /// Broadening of the waist (m).
    pub epsilon: f64,
}

impl SplitProfileParams {
    pub fn new(alpha: f64, epsilon: f64) -> Result<Self> {
        if !(alpha >= 0.0) || !(epsilon >= 0.0) || !alpha.is_finite() || !epsilon.is_finite() {
            return Err(invalid(format!(
                "alpha and epsilon must be finite and >= 0, got {alpha}, {epsilon}"
            )));
        }
        Ok(SplitProfileParams { alpha, epsilon })
    }
}

/// `A·exp(-½((x - c)/r)²)`
pub fn gaussian_density(x: f64, profile: &GaussianProfile) -> f64 {
    let u = (x - profile.center) / profile.waist;
    profile.amplitude * (-0.5 * u * u).exp()
}

/// The two half-power Gaussians displaced by ±alpha and widened by epsilon.
pub fn split_pair_density(
    x: f64,
    profile: &GaussianProfile,
    params: &SplitProfileParams,
) -> (f64, f64) {
    let r = profile.waist;
    let width = r + params.epsilon;
    let scale = profile.amplitude * r / width * 0.5;
    let u = x - profile.center;
    let lobe = |shift: f64| {
        let t = (u - shift) / width;
        scale * (-0.5 * t * t).exp()
    };
    (lobe(params.alpha), lobe(-params.alpha))
}

fn expansion_guard(name: &'static str, value: f64, waist: f64) -> Result<()> {
    let ratio = value / waist;
    if !(value >= 0.0) || !value.is_finite() {
        return Err(invalid(format!(
            "{name} must be finite and >= 0, got {value}"
        )));
    }
    if ratio >= EXPANSION_LIMIT {
        return Err(Error::ExpansionGuard {
            name,
            ratio,
            limit: EXPANSION_LIMIT,
        });
    }
    Ok(())
}

/// Density lost from the original beam when it splits into two half beams
/// displaced by ±alpha, in the expanded form
/// `A·e^{-x²/r²}·[1 - (1 - α²/r²)·cosh(2αx/r²)]`.
///
/// At `x = 0` this is `A·α²/r²`.
pub fn density_deficit(x: f64, alpha: f64, profile: &GaussianProfile) -> Result<f64> {
    let r = profile.waist;
    expansion_guard("alpha", alpha, r)?;
    let u = x - profile.center;
    let a2 = (alpha / r).powi(2);
    let half = alpha * u / (r * r);
    // 1 - (1 - a²)cosh(z) = a² - (1 - a²)·2sinh²(z/2)
    let bracket = a2 - (1.0 - a2) * 2.0 * half.sinh().powi(2);
    Ok(profile.amplitude * (-(u * u) / (r * r)).exp() * bracket)
}

/// Deficit including waist broadening epsilon:
/// `A·e^{-½x²/r²}·[1 - ((r-ε)/r)·e^{x²ε/r³}·e^{-α²/r²}·cosh(αx/r²)]`.
pub fn deficit_with_broadening(
    x: f64,
    alpha: f64,
    epsilon: f64,
    profile: &GaussianProfile,
) -> Result<f64> {
    let r = profile.waist;
    expansion_guard("alpha", alpha, r)?;
    expansion_guard("epsilon", epsilon, r)?;
    let u = x - profile.center;
    let kappa = (-epsilon / r).ln_1p() + u * u * epsilon / (r * r * r) - (alpha / r).powi(2);
    let half = 0.5 * alpha * u / (r * r);
    // 1 - e^κ·cosh(z) = -(e^κ - 1) - e^κ·2sinh²(z/2)
    let bracket = -kappa.exp_m1() - kappa.exp() * 2.0 * half.sinh().powi(2);
    Ok(profile.amplitude * (-0.5 * u * u / (r * r)).exp() * bracket)
}

/// Triangle estimate of the central loss after one pass:
/// `amplitude_scale · (θ_split·d / r)²`.
pub fn single_pass_estimate(
    theta_split: f64,
    length: f64,
    waist: f64,
    amplitude_scale: f64,
) -> f64 {
    amplitude_scale * (theta_split * length / waist).powi(2)
}

/// `∫_a^b exp(-½((x-μ)/σ)²) dx`, using erfc on the tails so that far-out
/// intervals keep their relative precision.
pub fn gaussian_interval(a: f64, b: f64, mean: f64, sigma: f64) -> f64 {
    let scale = sigma * FRAC_PI_2.sqrt();
    let ta = (a - mean) / (sigma * SQRT_2);
    let tb = (b - mean) / (sigma * SQRT_2);
    scale * erf_difference(ta, tb)
}

/// `erf(tb) - erf(ta)` for `ta <= tb`.
fn erf_difference(ta: f64, tb: f64) -> f64 {
    if ta >= 0.0 {
        erfc(ta) - erfc(tb)
    } else if tb <= 0.0 {
        erfc(-tb) - erfc(-ta)
    } else {
        erf(tb) - erf(ta)
    }
}

/// Bin edges of a detector histogram (m, measured from the beam axis).
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramSpec {
    edges: Vec<f64>,
}

impl HistogramSpec {
    /// `n_bins` bins of `bin_width` starting at the axis.
    pub fn uniform(bin_width: f64, n_bins: usize) -> Result<Self> {
        if !(bin_width > 0.0) || n_bins == 0 {
            return Err(invalid(format!(
                "need bin_width > 0 and at least one bin, got {bin_width}, {n_bins}"
            )));
        }
        Self::from_edges((0..=n_bins).map(|i| i as f64 * bin_width).collect())
    }

    pub fn from_edges(edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 {
            return Err(invalid("a histogram needs at least two edges"));
        }
        if edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid(
                "histogram edges must be finite and strictly increasing",
            ));
        }
        Ok(HistogramSpec { edges })
    }

    /// Three bins: centre `[0, w0/2]`, gap `[w0/2, w0]`, sideband
    /// `[w0, w0 + 1 mm + 3·w0]`.
    pub fn center_and_sidebands(w0: f64) -> Result<Self> {
        let regions = SidebandRegions::new(w0)?;
        Self::from_edges(vec![
            0.0,
            regions.center_half_width,
            regions.inner,
            regions.outer,
        ])
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }
}

impl Default for HistogramSpec {
    /// 30 bins of 0.1 mm from the axis out to 3 mm.
    fn default() -> Self {
        HistogramSpec::uniform(1e-4, 30).expect("static binning")
    }
}

/// One-sided binned photon counts (photons/s per bin).
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorHistogram {
    pub edges: Vec<f64>,
    pub counts: Vec<f64>,
}

impl DetectorHistogram {
    pub fn bin_count(&self) -> usize {
        self.counts.len()
    }

    pub fn bins(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.edges
            .windows(2)
            .zip(&self.counts)
            .map(|(w, &c)| (w[0], w[1], c))
    }

    pub fn signed_sum(&self) -> f64 {
        self.counts.iter().sum()
    }

    /// Photons moved, counting both sides of the axis: `2·Σ|bin|`.
    pub fn shifted_photons(&self) -> f64 {
        2.0 * self.counts.iter().map(|c| c.abs()).sum::<f64>()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "bin_lo_m,bin_hi_m,photons_per_s")?;
        for (lo, hi, c) in self.bins() {
            writeln!(
                out,
                "{},{},{}",
                format_sci(lo),
                format_sci(hi),
                format_sci(c)
            )?;
        }
        Ok(())
    }
}

/// Exact per-bin integrals of the ensemble's density: every beam contributes
/// `weight × A·exp(-½((x - x_beam)/r)²)` with the profile's waist.
pub fn bin_ensemble(
    ensemble: &BeamEnsemble,
    profile: &GaussianProfile,
    spec: &HistogramSpec,
) -> DetectorHistogram {
    let edges = spec.edges();
    let mut counts = vec![0.0; edges.len() - 1];
    let inv = 1.0 / (profile.waist * SQRT_2);
    let scale = profile.amplitude * profile.waist * FRAC_PI_2.sqrt();
    let mut t = vec![0.0; edges.len()];
    for beam in &ensemble.beams {
        let mean = profile.center + beam.ray.position;
        for (ti, e) in t.iter_mut().zip(edges) {
            *ti = (e - mean) * inv;
        }
        let w = beam.weight * scale;
        for (i, c) in counts.iter_mut().enumerate() {
            *c += w * erf_difference(t[i], t[i + 1]);
        }
    }
    DetectorHistogram {
        edges: edges.to_vec(),
        counts,
    }
}

/// Field-off minus field-on, bin by bin: positive where photons were lost.
pub fn profile_difference(
    on: &DetectorHistogram,
    off: &DetectorHistogram,
) -> Result<DetectorHistogram> {
    if on.edges != off.edges {
        return Err(Error::BinningMismatch);
    }
    Ok(DetectorHistogram {
        edges: on.edges.clone(),
        counts: off
            .counts
            .iter()
            .zip(&on.counts)
            .map(|(f, n)| f - n)
            .collect(),
    })
}

/// Integration windows of the centre-minus-sidebands signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SidebandRegions {
    pub center_half_width: f64,
    pub inner: f64,
    pub outer: f64,
}

impl SidebandRegions {
    pub fn new(w0: f64) -> Result<Self> {
        if !(w0 > 0.0) || !w0.is_finite() {
            return Err(invalid(format!("w0 must be > 0, got {w0}")));
        }
        Ok(SidebandRegions {
            center_half_width: 0.5 * w0,
            inner: w0,
            outer: w0 + SIDEBAND_EXTRA + 3.0 * w0,
        })
    }
}

fn edge_index(edges: &[f64], x: f64) -> Result<usize> {
    let tol = 1e-9 * x.abs().max(edges[edges.len() - 1]);
    edges
        .iter()
        .position(|e| (e - x).abs() <= tol)
        .ok_or_else(|| {
            if x > edges[edges.len() - 1] {
                Error::RangeInsufficient(format!(
                    "histogram ends at {:e} m, need {x:e} m",
                    edges[edges.len() - 1]
                ))
            } else {
                Error::RangeInsufficient(format!("{x:e} m is not a bin edge"))
            }
        })
}

/// `A - B`: doubled centre integral over `[-w0/2, w0/2]` minus doubled
/// sideband integral over `w0 .. w0 + 1 mm + 3·w0` on each side.
pub fn center_minus_sidebands(hist: &DetectorHistogram, w0: f64) -> Result<f64> {
    let regions = SidebandRegions::new(w0)?;
    let sum = |lo: usize, hi: usize| 2.0 * hist.counts[lo..hi].iter().sum::<f64>();
    let axis = edge_index(&hist.edges, 0.0)?;
    let center = edge_index(&hist.edges, regions.center_half_width)?;
    let inner = edge_index(&hist.edges, regions.inner)?;
    let outer = edge_index(&hist.edges, regions.outer)?;
    Ok(sum(axis, center) - sum(inner, outer))
}

/// Centre-minus-sidebands measured relative to a field-off baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SidebandSignal {
    pub w0: f64,
    pub baseline: f64,
}

impl SidebandSignal {
    pub fn from_reference(reference: &DetectorHistogram, w0: f64) -> Result<Self> {
        Ok(SidebandSignal {
            w0,
            baseline: center_minus_sidebands(reference, w0)?,
        })
    }

    /// Change of `A - B` relative to the baseline; negative when photons move
    /// from the centre into the sidebands.
    pub fn change(&self, hist: &DetectorHistogram) -> Result<f64> {
        Ok(center_minus_sidebands(hist, self.w0)? - self.baseline)
    }
}

/// CSV of an analytic deficit curve: `x_m,deficit_photons_per_s`.
pub fn write_deficit_csv<W: Write>(points: &[(f64, f64)], mut out: W) -> io::Result<()> {
    writeln!(out, "x_m,deficit_photons_per_s")?;
    for &(x, d) in points {
        writeln!(out, "{},{}", format_sci(x), format_sci(d))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cavity::{BeamEnsemble, WeightedBeam};
    use crate::optics::RayState;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn ensemble(beams: &[(f64, f64)]) -> BeamEnsemble {
        BeamEnsemble {
            beams: beams
                .iter()
                .map(|&(x, w)| WeightedBeam {
                    ray: RayState {
                        position: x,
                        angle: 0.0,
                    },
                    weight: w,
                    generation: 0,
                })
                .collect(),
            coalesce_tol_position: 0.0,
            coalesce_tol_angle: 0.0,
        }
    }

    #[test]
    fn gaussian_examples() {
        let p = GaussianProfile::new(2.0, 1e-3, 5e-4).unwrap();
        assert_eq!(gaussian_density(5e-4, &p), 2.0);
        let at_2r = gaussian_density(5e-4 + 2e-3, &p);
        assert!(rel(at_2r, 2.0 * (-2.0f64).exp()) < 1e-15);
        assert!((at_2r / 2.0 - 0.1353).abs() < 1e-4);

        let p = GaussianProfile::new(5e18, 7.5e-4, 0.0).unwrap();
        let v = gaussian_density(7.5e-4, &p);
        assert!(rel(v, 5e18 * (-0.5f64).exp()) < 1e-15);
        assert!(rel(v, 3.033e18) < 1e-3);

        assert!(GaussianProfile::new(0.0, 1.0, 0.0).is_err());
        assert!(GaussianProfile::new(1.0, -1.0, 0.0).is_err());
    }

    #[test]
    fn split_pair_examples() {
        let p = GaussianProfile::new(5e18, 7.5e-4, 0.0).unwrap();
        let none = SplitProfileParams::new(0.0, 0.0).unwrap();
        for x in [0.0, 3e-4, -1e-3] {
            let (a, b) = split_pair_density(x, &p, &none);
            assert_eq!(a, 0.5 * gaussian_density(x, &p));
            assert_eq!(b, a);
        }
        // the + lobe peaks at +alpha
        let shifted = SplitProfileParams::new(1e-5, 0.0).unwrap();
        let lobe = |x| split_pair_density(x, &p, &shifted).0;
        assert!(lobe(1e-5) > lobe(1e-5 - 1e-7));
        assert!(lobe(1e-5) > lobe(1e-5 + 1e-7));
        assert!(rel(lobe(1e-5), 2.5e18) < 1e-15);
        assert!(SplitProfileParams::new(-1.0, 0.0).is_err());
    }

    #[test]
    fn split_pair_conserves_power_without_broadening() {
        let p = GaussianProfile::new(1.0, 1.0, 0.0).unwrap();
        let params = SplitProfileParams::new(0.05, 0.0).unwrap();
        let h = 1e-3;
        let total: f64 = (-10_000..=10_000)
            .map(|i| {
                let (a, b) = split_pair_density(i as f64 * h, &p, &params);
                (a + b) * h
            })
            .sum();
        assert!(rel(total, p.total()) < 1e-9);
    }

    #[test]
    fn deficit_examples() {
        let p = GaussianProfile::new(5e18, 7.5e-4, 0.0).unwrap();
        let alpha = 5.6e-9;
        let at0 = density_deficit(0.0, alpha, &p).unwrap();
        assert!(rel(at0, 5e18 * (alpha / 7.5e-4).powi(2)) < 1e-12);
        for x in [0.0, 1e-4, 7.5e-4, 2e-3] {
            assert_eq!(density_deficit(x, 0.0, &p).unwrap(), 0.0);
        }
        // continuous through the axis
        let near = density_deficit(1e-12, alpha, &p).unwrap();
        assert!(rel(near, at0) < 1e-9);
        // gains past the bracket root r/√2
        assert!(density_deficit(0.5e-3, alpha, &p).unwrap() > 0.0);
        assert!(density_deficit(0.56e-3, alpha, &p).unwrap() < 0.0);
        assert!(matches!(
            density_deficit(0.0, 1e-4, &p),
            Err(Error::ExpansionGuard { .. })
        ));
    }

    #[test]
    fn broadening_examples() {
        let p = GaussianProfile::new(5e18, 7.5e-4, 0.0).unwrap();
        for x in [0.0, 4e-4, 1.5e-3] {
            assert_eq!(deficit_with_broadening(x, 0.0, 0.0, &p).unwrap(), 0.0);
        }
        // both expanded forms reduce to A·α²/r² on the axis
        let alpha = 5.6e-9;
        let a = deficit_with_broadening(0.0, alpha, 0.0, &p).unwrap();
        let b = density_deficit(0.0, alpha, &p).unwrap();
        assert!(rel(a, b) < 1e-9);

        let eps = 1e-6;
        let d = deficit_with_broadening(0.0, 0.0, eps, &p).unwrap();
        assert!(d > 0.0);
        let params = SplitProfileParams::new(0.0, eps).unwrap();
        let (l, r) = split_pair_density(0.0, &p, &params);
        let exact = gaussian_density(0.0, &p) - l - r;
        assert!(exact > 0.0);
        assert!(rel(d, exact) < 1e-2);
        assert!(deficit_with_broadening(0.0, 0.0, 1e-4, &p).is_err());
    }

    #[test]
    fn single_pass_examples() {
        let v = single_pass_estimate(4e-10, 14.0, 7.5e-4, TRIANGLE_AMPLITUDE);
        assert!(rel(v, 4.6458e7) < 1e-4);
        let v = single_pass_estimate(2e-14, 14.0, 7.5e-4, TRIANGLE_AMPLITUDE);
        assert!(rel(v, 0.11615) < 1e-4);
        assert_eq!(
            single_pass_estimate(0.0, 14.0, 7.5e-4, TRIANGLE_AMPLITUDE),
            0.0
        );
    }

    #[test]
    fn interval_integrals() {
        let full = gaussian_interval(-40.0, 40.0, 0.0, 2.0);
        assert!(rel(full, 2.0 * (2.0 * std::f64::consts::PI).sqrt()) < 1e-15);
        // far tail keeps relative precision
        let tail = gaussian_interval(10.0, 10.001, 0.0, 1.0);
        let mid = 10.0005f64;
        assert!(rel(tail, 0.001 * (-0.5 * mid * mid).exp()) < 1e-5);
        let left = gaussian_interval(-10.001, -10.0, 0.0, 1.0);
        assert!(rel(left, tail) < 1e-12);
    }

    #[test]
    fn default_binning() {
        let spec = HistogramSpec::default();
        assert_eq!(spec.edges().len(), 31);
        assert!((spec.edges()[30] - 3e-3).abs() < 1e-15);
        assert!(HistogramSpec::from_edges(vec![0.0, 0.0]).is_err());
        assert!(HistogramSpec::uniform(0.0, 3).is_err());
    }

    #[test]
    fn single_beam_histogram_is_reference_gaussian() {
        let p = GaussianProfile::default();
        let h = bin_ensemble(&ensemble(&[(0.0, 1.0)]), &p, &HistogramSpec::default());
        assert_eq!(h.bin_count(), 30);
        for (lo, hi, c) in h.bins() {
            let expect = p.amplitude * gaussian_interval(lo, hi, 0.0, p.waist);
            assert!(rel(c, expect) < 1e-14);
        }
        // half of the total lies on x >= 0 when the range is wide
        let wide = HistogramSpec::from_edges(vec![0.0, 20.0 * p.waist]).unwrap();
        let h = bin_ensemble(&ensemble(&[(0.0, 1.0)]), &p, &wide);
        assert!(rel(2.0 * h.signed_sum(), p.total()) < 1e-14);
    }

    #[test]
    fn normalization_independent_of_positions() {
        let p = GaussianProfile::default();
        let all = HistogramSpec::from_edges(vec![-30.0 * p.waist, 30.0 * p.waist]).unwrap();
        let a = bin_ensemble(&ensemble(&[(0.0, 1.0)]), &p, &all).signed_sum();
        let b = bin_ensemble(&ensemble(&[(3e-4, 0.25), (-1e-3, 0.75)]), &p, &all).signed_sum();
        assert!(rel(a, b) < 1e-14);
    }

    #[test]
    fn difference_requires_matching_bins() {
        let p = GaussianProfile::default();
        let e = ensemble(&[(0.0, 1.0)]);
        let h1 = bin_ensemble(&e, &p, &HistogramSpec::default());
        let h2 = bin_ensemble(&e, &p, &HistogramSpec::uniform(1e-4, 40).unwrap());
        assert_eq!(profile_difference(&h1, &h2), Err(Error::BinningMismatch));
        let zero = profile_difference(&h1, &h1).unwrap();
        assert!(zero.counts.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn sideband_signal_doubles_transfers() {
        let w0 = 7.5e-4;
        let p = GaussianProfile::default();
        let spec = HistogramSpec::center_and_sidebands(w0).unwrap();
        let reference = bin_ensemble(&ensemble(&[(0.0, 1.0)]), &p, &spec);
        let signal = SidebandSignal::from_reference(&reference, w0).unwrap();
        assert_eq!(signal.change(&reference).unwrap(), 0.0);

        // move delta photons (both sides together) from centre to sidebands
        let delta = 1e9;
        let mut moved = reference.clone();
        moved.counts[0] -= delta / 2.0;
        moved.counts[2] += delta / 2.0;
        let change = signal.change(&moved).unwrap();
        assert!(rel(change, -2.0 * delta) < 1e-3);
    }

    #[test]
    fn sideband_signal_range_errors() {
        let p = GaussianProfile::default();
        let short = bin_ensemble(&ensemble(&[(0.0, 1.0)]), &p, &HistogramSpec::default());
        assert!(matches!(
            center_minus_sidebands(&short, 7.5e-4),
            Err(Error::RangeInsufficient(_))
        ));
        let fine = bin_ensemble(
            &ensemble(&[(0.0, 1.0)]),
            &p,
            &HistogramSpec::uniform(2.5e-5, 160).unwrap(),
        );
        let coarse = bin_ensemble(
            &ensemble(&[(0.0, 1.0)]),
            &p,
            &HistogramSpec::center_and_sidebands(7.5e-4).unwrap(),
        );
        let a = center_minus_sidebands(&fine, 7.5e-4).unwrap();
        let b = center_minus_sidebands(&coarse, 7.5e-4).unwrap();
        assert!(rel(a, b) < 1e-12);
    }

    #[test]
    fn csv_headers() {
        let p = GaussianProfile::default();
        let h = bin_ensemble(&ensemble(&[(0.0, 1.0)]), &p, &HistogramSpec::default());
        let mut buf = Vec::new();
        h.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("bin_lo_m,bin_hi_m,photons_per_s\n"));
        assert_eq!(text.lines().count(), 31);

        let mut buf = Vec::new();
        write_deficit_csv(&[(0.0, 1.0)], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "x_m,deficit_photons_per_s\n0.0000000000000000e0,1.0000000000000000e0\n"
        );
    }
}
