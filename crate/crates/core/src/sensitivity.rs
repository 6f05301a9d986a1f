//! Growth-series fits, extrapolation, shot noise and the minimum measurable
//! coupling.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Photons per second in the full beam, used as the fractional-signal
/// denominator and as the default noise population.
pub const FULL_BEAM_PHOTONS: f64 = 5e18;

/// Signal as a function of traversal (or extraction) count.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthSeries {
    points: Vec<(f64, f64)>,
}

impl GrowthSeries {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.iter().any(|(n, s)| !n.is_finite() || !s.is_finite()) {
            return Err(Error::DegenerateSeries("non-finite entry".into()));
        }
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::DegenerateSeries(
                "traversal counts must be strictly increasing".into(),
            ));
        }
        Ok(GrowthSeries { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn check_fittable(&self) -> Result<()> {
        if self.points.len() < 3 {
            return Err(Error::DegenerateSeries(format!(
                "need at least 3 points, got {}",
                self.points.len()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitKind {
    Linear,
    Power,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GrowthFit {
    Linear {
        slope: f64,
        intercept: f64,
        r_squared: f64,
    },
    Power {
        coefficient: f64,
        exponent: f64,
        r_squared: f64,
    },
}

impl GrowthFit {
    pub fn linear(slope: f64, intercept: f64) -> Self {
        GrowthFit::Linear {
            slope,
            intercept,
            r_squared: 1.0,
        }
    }

    pub fn power(coefficient: f64, exponent: f64) -> Self {
        GrowthFit::Power {
            coefficient,
            exponent,
            r_squared: 1.0,
        }
    }

    pub fn kind(&self) -> FitKind {
        match self {
            GrowthFit::Linear { .. } => FitKind::Linear,
            GrowthFit::Power { .. } => FitKind::Power,
        }
    }

    pub fn r_squared(&self) -> f64 {
        match *self {
            GrowthFit::Linear { r_squared, .. } | GrowthFit::Power { r_squared, .. } => r_squared,
        }
    }

    pub fn evaluate(&self, n: f64) -> f64 {
        match *self {
            GrowthFit::Linear {
                slope, intercept, ..
            } => slope * n + intercept,
            GrowthFit::Power {
                coefficient,
                exponent,
                ..
            } => coefficient * n.powf(exponent),
        }
    }
}

struct LineFit {
    slope: f64,
    intercept: f64,
    r_squared: f64,
}

fn least_squares(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::DegenerateSeries("all abscissae equal".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - (slope * x + intercept)).powi(2))
        .sum();
    let r_squared = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(LineFit {
        slope,
        intercept,
        r_squared,
    })
}

pub fn fit_linear(series: &GrowthSeries) -> Result<GrowthFit> {
    series.check_fittable()?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = series.points.iter().copied().unzip();
    let f = least_squares(&xs, &ys)?;
    Ok(GrowthFit::Linear {
        slope: f.slope,
        intercept: f.intercept,
        r_squared: f.r_squared,
    })
}

/// Fits `c·n^p` by least squares in log-log space; R² refers to that space.
pub fn fit_power(series: &GrowthSeries) -> Result<GrowthFit> {
    series.check_fittable()?;
    if series.points.iter().any(|&(n, s)| n <= 0.0 || s <= 0.0) {
        return Err(invalid("power fit needs positive counts and signals"));
    }
    let xs: Vec<f64> = series.points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = series.points.iter().map(|p| p.1.ln()).collect();
    let f = least_squares(&xs, &ys)?;
    Ok(GrowthFit::Power {
        coefficient: f.intercept.exp(),
        exponent: f.slope,
        r_squared: f.r_squared,
    })
}

pub fn fit(series: &GrowthSeries, kind: FitKind) -> Result<GrowthFit> {
    match kind {
        FitKind::Linear => fit_linear(series),
        FitKind::Power => fit_power(series),
    }
}

pub fn extrapolate(fit: &GrowthFit, n: f64) -> f64 {
    fit.evaluate(n)
}

/// Both fits side by side, with the implied growth of the beam separation:
/// signal ∝ f(n)², so f(n) ~ n^(p/2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthClassification {
    pub linear: GrowthFit,
    pub power: GrowthFit,
    pub separation_exponent: f64,
}

pub fn classify_growth(series: &GrowthSeries) -> Result<GrowthClassification> {
    let linear = fit_linear(series)?;
    let power = fit_power(series)?;
    let exponent = match power {
        GrowthFit::Power { exponent, .. } => exponent,
        GrowthFit::Linear { .. } => unreachable!(),
    };
    Ok(GrowthClassification {
        linear,
        power,
        separation_exponent: exponent / 2.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseBudget {
    pub photon_rate: f64,
    pub integration_time: f64,
}

impl NoiseBudget {
    pub fn new(photon_rate: f64, integration_time: f64) -> Result<Self> {
        if !(photon_rate > 0.0) || !(integration_time > 0.0) {
            return Err(invalid(format!(
                "noise budget needs rate > 0 and time > 0, got {photon_rate}, {integration_time}"
            )));
        }
        Ok(NoiseBudget {
            photon_rate,
            integration_time,
        })
    }
}

/// `1/√(N·t)`
pub fn shot_noise_fraction(budget: &NoiseBudget) -> f64 {
    1.0 / (budget.photon_rate * budget.integration_time).sqrt()
}

/// `g_ref·√(noise/signal)`; infinite when there is no signal.
pub fn min_coupling(g_ref: f64, signal_fraction: f64, noise_fraction: f64) -> f64 {
    if !(signal_fraction > 0.0) {
        return f64::INFINITY;
    }
    g_ref * (noise_fraction / signal_fraction).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportInputs {
    pub scenario: String,
    pub fit: GrowthFit,
    /// Number of extractions the fit is evaluated at.
    pub extraction_count: f64,
    /// Denominator of the fractional signal.
    pub total_photons: f64,
    /// Population whose shot noise limits the measurement.
    pub noise_photons: f64,
    pub integration_time: f64,
    /// Coupling the fit was produced at (GeV⁻¹).
    pub g_ref: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub scenario: String,
    pub fit: GrowthFit,
    pub extrapolated_photons: f64,
    pub signal_fraction: f64,
    pub noise_fraction: f64,
    /// `None` when the signal is not positive (no sensitivity).
    pub g_min_1s: Option<f64>,
    pub g_min_integrated: Option<f64>,
    pub integration_time_s: f64,
}

impl ScenarioReport {
    pub fn has_sensitivity(&self) -> bool {
        self.g_min_1s.is_some()
    }
}

pub fn scenario_report(inputs: &ReportInputs) -> Result<ScenarioReport> {
    if !(inputs.extraction_count >= 1.0) {
        return Err(invalid("extraction count must be >= 1"));
    }
    if !(inputs.total_photons > 0.0) || !(inputs.g_ref > 0.0) {
        return Err(invalid("total photons and g_ref must be > 0"));
    }
    let extrapolated = extrapolate(&inputs.fit, inputs.extraction_count);
    let signal_fraction = extrapolated / inputs.total_photons;
    let noise_1s = shot_noise_fraction(&NoiseBudget::new(inputs.noise_photons, 1.0)?);
    let noise_t = shot_noise_fraction(&NoiseBudget::new(
        inputs.noise_photons,
        inputs.integration_time,
    )?);
    let finite = |g: f64| g.is_finite().then_some(g);
    Ok(ScenarioReport {
        scenario: inputs.scenario.clone(),
        fit: inputs.fit,
        extrapolated_photons: extrapolated,
        signal_fraction,
        noise_fraction: noise_1s,
        g_min_1s: finite(min_coupling(inputs.g_ref, signal_fraction, noise_1s)),
        g_min_integrated: finite(min_coupling(inputs.g_ref, signal_fraction, noise_t)),
        integration_time_s: inputs.integration_time,
    })
}
