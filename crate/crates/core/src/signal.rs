//! Field-on versus field-off detector signals for a cavity configuration.

use crate::cavity::{field_off, run, BeamEnsemble, CavityConfig};
use crate::error::{invalid, Result};
use crate::profile::{
    bin_ensemble, center_minus_sidebands, gaussian_interval, profile_difference, DetectorHistogram,
    GaussianProfile, HistogramSpec, SidebandRegions,
};
use crate::sensitivity::GrowthSeries;

/// Largest |shift|/r for which the moment expansion is used.
const EXPANSION_SHIFT_LIMIT: f64 = 0.1;
const MAX_ORDER: usize = 60;

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorSettings {
    pub profile: GaussianProfile,
    pub histogram: HistogramSpec,
    /// Beam waist defining the centre and sideband windows (m).
    pub w0: f64,
    pub central_pixel: (f64, f64),
    pub sideband_pixel: (f64, f64),
}

impl Default for DetectorSettings {
    fn default() -> Self {
        DetectorSettings {
            profile: GaussianProfile::default(),
            histogram: HistogramSpec::default(),
            w0: crate::profile::DEFAULT_WAIST,
            central_pixel: (0.0, 1e-4),
            sideband_pixel: (3.3e-3, 3.4e-3),
        }
    }
}

/// Signals seen at the detector after one extraction.
#[derive(Debug, Clone, PartialEq)]
pub struct TraversalSignal {
    pub traversal: usize,
    /// 1-based count of extractions so far.
    pub extraction: usize,
    /// Field-off minus field-on over the configured binning.
    pub difference: DetectorHistogram,
    /// Photons/s lost from the central pixel.
    pub central_loss: f64,
    /// Photons/s gained in the sideband pixel.
    pub sideband_gain: f64,
    /// Drop of the centre-minus-sidebands value, off minus on.
    pub sideband_signal: f64,
}

/// `off - on` per bin. When the reference is a single beam and every on-beam
/// sits close to it, the difference is expanded in the moments of the
/// displacements so that second-order losses far below the rounding level of
/// the full counts survive.
pub fn difference_histogram(
    on: &BeamEnsemble,
    off: &BeamEnsemble,
    profile: &GaussianProfile,
    spec: &HistogramSpec,
) -> Result<DetectorHistogram> {
    if let [reference] = off.beams.as_slice() {
        let x_ref = reference.ray.position;
        let r = profile.waist;
        let max_shift = on
            .beams
            .iter()
            .map(|b| (b.ray.position - x_ref).abs())
            .fold(0.0, f64::max);
        if max_shift / r < EXPANSION_SHIFT_LIMIT {
            return Ok(moment_difference(
                on,
                x_ref,
                reference.weight,
                profile,
                spec,
            ));
        }
    }
    profile_difference(
        &bin_ensemble(on, profile, spec),
        &bin_ensemble(off, profile, spec),
    )
}

/// `He_m(t)·exp(-t²/2)` for m = 0..len
fn hermite_gaussians(t: f64, out: &mut [f64]) {
    let g = (-0.5 * t * t).exp();
    let (mut prev, mut cur) = (0.0, 1.0);
    for (m, slot) in out.iter_mut().enumerate() {
        *slot = cur * g;
        let next = t * cur - m as f64 * prev;
        prev = cur;
        cur = next;
    }
}

fn moment_difference(
    on: &BeamEnsemble,
    x_ref: f64,
    ref_weight: f64,
    profile: &GaussianProfile,
    spec: &HistogramSpec,
) -> DetectorHistogram {
    let r = profile.waist;
    let center = profile.center + x_ref;
    // mu[k] = Σ w·(δ/r)^k / k!
    let mut mu = vec![0.0; MAX_ORDER + 1];
    for b in &on.beams {
        let d = (b.ray.position - x_ref) / r;
        let mut term = b.weight;
        for (k, m) in mu.iter_mut().enumerate() {
            if k > 0 {
                term *= d / k as f64;
            }
            if term == 0.0 {
                break;
            }
            *m += term;
        }
    }
    let edges = spec.edges();
    let h: Vec<Vec<f64>> = edges
        .iter()
        .map(|e| {
            let mut v = vec![0.0; MAX_ORDER];
            hermite_gaussians((e - center) / r, &mut v);
            v
        })
        .collect();
    let counts = edges
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            let lost_weight = ref_weight - mu[0];
            let mut sum = if lost_weight != 0.0 {
                lost_weight * gaussian_interval(w[0], w[1], center, r) / r
            } else {
                0.0
            };
            for k in 1..=MAX_ORDER {
                if mu[k] != 0.0 {
                    sum += mu[k] * (h[i + 1][k - 1] - h[i][k - 1]);
                }
            }
            profile.amplitude * r * sum
        })
        .collect();
    DetectorHistogram {
        edges: edges.to_vec(),
        counts,
    }
}

fn signal_edges(settings: &DetectorSettings) -> Result<HistogramSpec> {
    let regions = SidebandRegions::new(settings.w0)?;
    let mut edges = vec![
        0.0,
        settings.central_pixel.0,
        settings.central_pixel.1,
        regions.center_half_width,
        regions.inner,
        regions.outer,
        settings.sideband_pixel.0,
        settings.sideband_pixel.1,
    ];
    edges.sort_by(f64::total_cmp);
    edges.dedup_by(|a, b| (*a - *b).abs() <= 1e-15);
    HistogramSpec::from_edges(edges)
}

fn bin_of(hist: &DetectorHistogram, pixel: (f64, f64)) -> Result<f64> {
    let tol = 1e-15;
    let lo = hist.edges.iter().position(|e| (e - pixel.0).abs() <= tol);
    let hi = hist.edges.iter().position(|e| (e - pixel.1).abs() <= tol);
    match (lo, hi) {
        (Some(lo), Some(hi)) if hi > lo => Ok(hist.counts[lo..hi].iter().sum()),
        _ => Err(invalid(format!(
            "pixel {pixel:?} is not aligned with the binning"
        ))),
    }
}

/// Runs the configuration with and without field and compares the detector
/// ensembles at every extraction.
pub fn detector_signals(
    config: &CavityConfig,
    settings: &DetectorSettings,
) -> Result<Vec<TraversalSignal>> {
    for (name, (lo, hi)) in [
        ("central pixel", settings.central_pixel),
        ("sideband pixel", settings.sideband_pixel),
    ] {
        if !(lo >= 0.0) || !(hi > lo) {
            return Err(invalid(format!(
                "{name} needs 0 <= lo < hi, got {lo}, {hi}"
            )));
        }
    }
    let on = run(config, true)?;
    let off = run(&field_off(config), true)?;
    let signal_spec = signal_edges(settings)?;
    on.snapshots
        .iter()
        .zip(&off.snapshots)
        .enumerate()
        .map(|(i, (s_on, s_off))| {
            let p = &settings.profile;
            let difference =
                difference_histogram(&s_on.ensemble, &s_off.ensemble, p, &settings.histogram)?;
            let fine = difference_histogram(&s_on.ensemble, &s_off.ensemble, p, &signal_spec)?;
            Ok(TraversalSignal {
                traversal: s_on.traversal,
                extraction: i + 1,
                difference,
                central_loss: bin_of(&fine, settings.central_pixel)?,
                sideband_gain: -bin_of(&fine, settings.sideband_pixel)?,
                sideband_signal: center_minus_sidebands(&fine, settings.w0)?,
            })
        })
        .collect()
}

/// Growth series of one signal column against the traversal count.
pub fn growth_series(
    signals: &[TraversalSignal],
    pick: impl Fn(&TraversalSignal) -> f64,
) -> Result<GrowthSeries> {
    GrowthSeries::new(
        signals
            .iter()
            .map(|s| (s.traversal as f64, pick(s)))
            .collect(),
    )
}
