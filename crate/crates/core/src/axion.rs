//! Axion-photon mixing: matrix elements, mixing angle, mass suppression and
//! the calibration between splitting angle and coupling.

use std::f64::consts::PI;
use std::io::{self, Write};

use crate::error::{invalid, Error, Result};
use crate::format_sci;

/// Critical (Schwinger) field (T).
pub const B_CRIT: f64 = 4.41e9;
pub const FINE_STRUCTURE: f64 = 1.0 / 137.036;
/// Field-to-energy² conversion (eV²/T).
pub const TESLA_TO_EV2: f64 = 195.0;
/// GeV⁻¹ → eV⁻¹.
pub const GEV_INV_TO_EV_INV: f64 = 1e-9;
/// Photon energy at 1064 nm (eV).
pub const OMEGA_1064NM: f64 = 1.165;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingParameters {
    /// Photon energy (eV).
    pub omega: f64,
    /// Coupling (GeV⁻¹).
    pub g_a: f64,
    /// External field (T).
    pub b_ext: f64,
    /// Axion mass (eV).
    pub m_a: f64,
    pub b_crit: f64,
    pub tesla_to_ev2: f64,
}

impl MixingParameters {
    pub fn new(omega: f64, g_a: f64, b_ext: f64, m_a: f64) -> Result<Self> {
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(invalid(format!("omega must be > 0, got {omega}")));
        }
        for (name, v) in [("g_a", g_a), ("B_ext", b_ext), ("m_a", m_a)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(invalid(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(MixingParameters {
            omega,
            g_a,
            b_ext,
            m_a,
            b_crit: B_CRIT,
            tesla_to_ev2: TESLA_TO_EV2,
        })
    }

    pub fn with_mass(&self, m_a: f64) -> Self {
        MixingParameters { m_a, ..*self }
    }

    /// Coupling in eV⁻¹.
    pub fn g_a_ev(&self) -> f64 {
        self.g_a * GEV_INV_TO_EV_INV
    }
}

/// `Q_M = ω·g_a·B·195` (eV²)
pub fn q_m(p: &MixingParameters) -> f64 {
    p.omega * p.g_a_ev() * p.b_ext * p.tesla_to_ev2
}

/// `Q_γ = ω²·(7α/45π)·(B/B_crit)²` (eV²)
pub fn q_gamma(p: &MixingParameters) -> f64 {
    p.omega.powi(2) * 7.0 * FINE_STRUCTURE / (45.0 * PI) * (p.b_ext / p.b_crit).powi(2)
}

/// `Q_a = -m²` (eV²)
pub fn q_a(m_a: f64) -> f64 {
    -m_a * m_a
}

/// `½·atan2(2·Q_M, Q_γ - Q_a)`
pub fn mixing_angle_from(q_m: f64, q_gamma: f64, q_a: f64) -> Result<f64> {
    let diag = q_gamma - q_a;
    if q_m == 0.0 && diag == 0.0 {
        return Err(Error::DegenerateMixing);
    }
    Ok(0.5 * (2.0 * q_m).atan2(diag))
}

pub fn mixing_angle(p: &MixingParameters) -> Result<f64> {
    mixing_angle_from(q_m(p), q_gamma(p), q_a(p.m_a))
}

/// `sin²(2φ)`, equal to 1 at maximal mixing.
pub fn suppression_factor(p: &MixingParameters) -> Result<f64> {
    Ok((2.0 * mixing_angle(p)?).sin().powi(2))
}

/// Reference point of the linear θ_split scaling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCalibration {
    pub theta_ref: f64,
    pub g_ref: f64,
    pub grad_b_ref: f64,
    pub field_length_ref: f64,
}

impl SplitCalibration {
    pub fn new(theta_ref: f64, g_ref: f64, grad_b_ref: f64, field_length_ref: f64) -> Result<Self> {
        if [theta_ref, g_ref, grad_b_ref, field_length_ref]
            .iter()
            .any(|v| !(*v > 0.0) || !v.is_finite())
        {
            return Err(invalid("calibration values must be finite and > 0"));
        }
        Ok(SplitCalibration {
            theta_ref,
            g_ref,
            grad_b_ref,
            field_length_ref,
        })
    }
}

impl Default for SplitCalibration {
    /// 4e-10 rad at g = 1e-6 GeV⁻¹, 200 T/m over 10 m.
    fn default() -> Self {
        SplitCalibration {
            theta_ref: 4e-10,
            g_ref: 1e-6,
            grad_b_ref: 200.0,
            field_length_ref: 10.0,
        }
    }
}

pub fn theta_split_from_coupling(
    g_a: f64,
    grad_b: f64,
    field_length: f64,
    cal: &SplitCalibration,
) -> Result<f64> {
    if [g_a, grad_b, field_length]
        .iter()
        .any(|v| !(*v > 0.0) || !v.is_finite())
    {
        return Err(invalid("coupling, gradient and field length must be > 0"));
    }
    Ok(cal.theta_ref
        * (g_a / cal.g_ref)
        * (grad_b / cal.grad_b_ref)
        * (field_length / cal.field_length_ref))
}

/// Largest mass whose suppression factor is still at least `threshold`.
pub fn max_measurable_mass(p: &MixingParameters, threshold: f64) -> Result<f64> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(invalid(format!(
            "threshold must lie in (0, 1), got {threshold}"
        )));
    }
    let s = |m: f64| suppression_factor(&p.with_mass(m));
    let s0 = s(0.0)?;
    if s0 < threshold {
        return Err(Error::NoRoot(format!(
            "suppression {s0:e} at zero mass is already below {threshold}"
        )));
    }
    let mut lo = 0.0;
    let mut hi = (q_gamma(p) + 2.0 * q_m(p)).sqrt().max(f64::MIN_POSITIVE);
    let mut expansions = 0;
    while s(hi)? >= threshold {
        lo = hi;
        hi *= 2.0;
        expansions += 1;
        if expansions > 2000 || !hi.is_finite() {
            return Err(Error::NoRoot(
                "suppression never drops below threshold".into(),
            ));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if s(mid)? >= threshold {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassScanRow {
    pub m_a: f64,
    pub phi: f64,
    pub suppression: f64,
}

/// `steps` masses from `m_lo` to `m_hi` inclusive, spaced linearly or
/// logarithmically.
pub fn mass_scan(
    p: &MixingParameters,
    m_lo: f64,
    m_hi: f64,
    steps: usize,
    logarithmic: bool,
) -> Result<Vec<MassScanRow>> {
    if !(m_lo >= 0.0) || !(m_hi > m_lo) || steps < 2 {
        return Err(invalid(format!(
            "need 0 <= m_lo < m_hi and steps >= 2, got {m_lo}, {m_hi}, {steps}"
        )));
    }
    if logarithmic && m_lo == 0.0 {
        return Err(invalid("a logarithmic scan needs m_lo > 0"));
    }
    let last = (steps - 1) as f64;
    (0..steps)
        .map(|i| {
            let t = i as f64 / last;
            let m = if i == steps - 1 {
                m_hi
            } else if logarithmic {
                m_lo * (m_hi / m_lo).powf(t)
            } else {
                m_lo + (m_hi - m_lo) * t
            };
            let q = p.with_mass(m);
            let phi = mixing_angle(&q)?;
            Ok(MassScanRow {
                m_a: m,
                phi,
                suppression: (2.0 * phi).sin().powi(2),
            })
        })
        .collect()
}

/// CSV `m_a_ev,phi_rad,suppression`, with an extra `g_min_gev_inv` column
/// (`g_min/√suppression`) when a zero-mass reach is supplied.
pub fn write_mass_scan_csv<W: Write>(
    rows: &[MassScanRow],
    g_min: Option<f64>,
    mut out: W,
) -> io::Result<()> {
    match g_min {
        None => writeln!(out, "m_a_ev,phi_rad,suppression")?,
        Some(_) => writeln!(out, "m_a_ev,phi_rad,suppression,g_min_gev_inv")?,
    }
    for r in rows {
        write!(
            out,
            "{},{},{}",
            format_sci(r.m_a),
            format_sci(r.phi),
            format_sci(r.suppression)
        )?;
        if let Some(g) = g_min {
            let eff = if r.suppression > 0.0 {
                g / r.suppression.sqrt()
            } else {
                f64::INFINITY
            };
            write!(out, ",{}", format_sci(eff))?;
        }
        writeln!(out)?;
    }
    Ok(())
}
