//! Scenario documents: TOML with `cavity`, `laser`, `magnet`, `axion` and
//! `analysis` sections. Presets are compiled in and also shipped under
//! `presets/`.

use std::path::Path;

use axsplit::axion::MixingParameters;
use axsplit::cavity::{CavityConfig, CavityKind, DetectorLens, ExtractionMirror};
use axsplit::optics::{Mirror, RayState};
use axsplit::profile::{GaussianProfile, HistogramSpec};
use axsplit::sensitivity::{FitKind, GrowthFit};
use axsplit::signal::DetectorSettings;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// hc in eV·nm.
const HC_EV_NM: f64 = 1239.841984;

pub const PRESETS: [(&str, &str); 4] = [
    (
        "table1.confocal",
        include_str!("../presets/table1.confocal.toml"),
    ),
    (
        "table2.bnl-quad",
        include_str!("../presets/table2.bnl-quad.toml"),
    ),
    (
        "planar-concave",
        include_str!("../presets/planar-concave.toml"),
    ),
    (
        "convex-concave",
        include_str!("../presets/convex-concave.toml"),
    ),
];

pub const DEFAULT_PRESET: &str = "table1.confocal";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub cavity: CavitySection,
    pub laser: LaserSection,
    pub magnet: MagnetSection,
    pub axion: AxionSection,
    pub analysis: AnalysisSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavitySection {
    pub kind: CavityKind,
    pub cavity_length_m: f64,
    pub field_length_m: f64,
    pub gap_m: f64,
    pub detector_distance_m: f64,
    pub extraction: ExtractionMirror,
    pub n_traversals: usize,
    pub theta_split_rad: f64,
    #[serde(default = "yes")]
    pub split_on_backward: bool,
    #[serde(default = "default_coalesce_position")]
    pub coalesce_position_m: f64,
    #[serde(default = "default_coalesce_angle")]
    pub coalesce_angle_rad: f64,
    #[serde(default)]
    pub input_position_m: f64,
    #[serde(default)]
    pub input_angle_rad: f64,
    pub mirror1: Mirror,
    pub mirror2: Mirror,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detector_lens: Option<DetectorLens>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaserSection {
    pub wavelength_nm: f64,
    pub power_w: f64,
    pub amplitude_photons_per_s: f64,
    pub waist_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MagnetSection {
    pub grad_b_t_per_m: f64,
    pub field_length_m: f64,
    /// Field strength entering the mixing terms.
    pub b_ext_t: f64,
    /// Recorded only; the on/off comparison is always performed.
    #[serde(default = "yes")]
    pub modulated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxionSection {
    pub g_a_gev_inv: f64,
    #[serde(default)]
    pub m_a_ev: f64,
    /// Falls back to the laser photon energy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_ev: Option<f64>,
    pub scan_min_ev: f64,
    pub scan_max_ev: f64,
    pub scan_steps: usize,
    #[serde(default)]
    pub scan_log: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    pub bin_width_m: f64,
    pub n_bins: usize,
    pub w0_m: f64,
    pub central_pixel_m: [f64; 2],
    pub sideband_pixel_m: [f64; 2],
    pub fit_kind: FitKind,
    pub signal_column: String,
    pub extraction_count: f64,
    pub integration_time_s: f64,
    pub g_ref_gev_inv: f64,
    pub total_photons: f64,
    pub noise_photons: f64,
    /// Fit used by `analyze` and `mass-scan` when no series is supplied.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<GrowthFit>,
}

fn yes() -> bool {
    true
}

fn default_coalesce_position() -> f64 {
    axsplit::cavity::DEFAULT_COALESCE_POSITION
}

fn default_coalesce_angle() -> f64 {
    axsplit::cavity::DEFAULT_COALESCE_ANGLE
}

pub fn preset_text(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

/// Reads `source` as a file path, or as a preset name when no such file
/// exists, then applies the overrides.
pub fn load(source: Option<&str>, overrides: &[String]) -> Result<ScenarioFile, CliError> {
    let text = match source {
        None => preset_text(DEFAULT_PRESET).unwrap_or_default().to_string(),
        Some(s) if Path::new(s).is_file() => std::fs::read_to_string(s)
            .map_err(|e| CliError::Config(format!("cannot read {s}: {e}")))?,
        Some(s) => preset_text(s)
            .ok_or_else(|| CliError::Config(format!("no file or preset named {s:?}")))?
            .to_string(),
    };
    parse(&text, overrides)
}

pub fn parse(text: &str, overrides: &[String]) -> Result<ScenarioFile, CliError> {
    let mut table: toml::Table =
        toml::from_str(text).map_err(|e| CliError::Config(format!("malformed scenario: {e}")))?;
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    let scenario: ScenarioFile = table
        .try_into()
        .map_err(|e| CliError::Config(format!("invalid scenario: {e}")))?;
    scenario.check()?;
    Ok(scenario)
}

/// `a.b.c=value`, with the value read as a TOML literal and taken as a bare
/// string when it is not one.
pub fn apply_override(table: &mut toml::Table, spec: &str) -> Result<(), CliError> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override {spec:?} is not key=value")))?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(CliError::Config(format!("bad override path {path:?}")));
    }
    let raw = raw.trim();
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let (last, parents) = keys.split_last().expect("non-empty path");
    let mut node = table;
    for k in parents {
        node = node
            .entry(k.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("{k:?} in {path:?} is not a section")))?;
    }
    node.insert(last.to_string(), value);
    Ok(())
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!(
            "{name} must be finite and > 0, got {v}"
        )))
    }
}

impl ScenarioFile {
    /// Checks beyond what the core types validate.
    pub fn check(&self) -> Result<(), CliError> {
        let l = &self.laser;
        let m = &self.magnet;
        let a = &self.analysis;
        for (name, v) in [
            ("laser.wavelength_nm", l.wavelength_nm),
            ("laser.power_w", l.power_w),
            ("laser.amplitude_photons_per_s", l.amplitude_photons_per_s),
            ("laser.waist_m", l.waist_m),
            ("magnet.grad_b_t_per_m", m.grad_b_t_per_m),
            ("magnet.field_length_m", m.field_length_m),
            ("magnet.b_ext_t", m.b_ext_t),
            ("axion.g_a_gev_inv", self.axion.g_a_gev_inv),
            ("analysis.bin_width_m", a.bin_width_m),
            ("analysis.w0_m", a.w0_m),
            ("analysis.extraction_count", a.extraction_count),
            ("analysis.integration_time_s", a.integration_time_s),
            ("analysis.g_ref_gev_inv", a.g_ref_gev_inv),
            ("analysis.total_photons", a.total_photons),
            ("analysis.noise_photons", a.noise_photons),
        ] {
            positive(name, v)?;
        }
        if let Some(w) = self.axion.omega_ev {
            positive("axion.omega_ev", w)?;
        }
        if m.field_length_m != self.cavity.field_length_m {
            return Err(CliError::Config(format!(
                "magnet.field_length_m = {} differs from cavity.field_length_m = {}",
                m.field_length_m, self.cavity.field_length_m
            )));
        }
        if !SIGNAL_COLUMNS.contains(&a.signal_column.as_str()) {
            return Err(CliError::Config(format!(
                "analysis.signal_column must be one of {SIGNAL_COLUMNS:?}"
            )));
        }
        self.cavity_config()?;
        self.detector_settings()?;
        self.mixing()?;
        Ok(())
    }

    pub fn cavity_config(&self) -> Result<CavityConfig, CliError> {
        let c = &self.cavity;
        let input = RayState::new(c.input_position_m, c.input_angle_rad)
            .map_err(|e| CliError::Config(format!("cavity input ray: {e}")))?;
        let config = CavityConfig {
            kind: c.kind,
            cavity_length: c.cavity_length_m,
            field_length: c.field_length_m,
            gap: c.gap_m,
            detector_distance: c.detector_distance_m,
            detector_lens: c.detector_lens,
            mirror1: c.mirror1,
            mirror2: c.mirror2,
            extraction: c.extraction,
            n_traversals: c.n_traversals,
            theta_split: c.theta_split_rad,
            split_on_backward: c.split_on_backward,
            coalesce_position: c.coalesce_position_m,
            coalesce_angle: c.coalesce_angle_rad,
            input,
        };
        config
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        Ok(config)
    }

    pub fn profile(&self) -> Result<GaussianProfile, CliError> {
        GaussianProfile::new(self.laser.amplitude_photons_per_s, self.laser.waist_m, 0.0)
            .map_err(|e| CliError::Config(format!("laser: {e}")))
    }

    pub fn detector_settings(&self) -> Result<DetectorSettings, CliError> {
        let a = &self.analysis;
        let histogram = HistogramSpec::uniform(a.bin_width_m, a.n_bins)
            .map_err(|e| CliError::Config(format!("analysis: {e}")))?;
        for (name, [lo, hi]) in [
            ("central_pixel_m", a.central_pixel_m),
            ("sideband_pixel_m", a.sideband_pixel_m),
        ] {
            if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
                return Err(CliError::Config(format!(
                    "analysis.{name} needs 0 <= lo < hi, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(DetectorSettings {
            profile: self.profile()?,
            histogram,
            w0: a.w0_m,
            central_pixel: (a.central_pixel_m[0], a.central_pixel_m[1]),
            sideband_pixel: (a.sideband_pixel_m[0], a.sideband_pixel_m[1]),
        })
    }

    pub fn omega_ev(&self) -> f64 {
        self.axion
            .omega_ev
            .unwrap_or(HC_EV_NM / self.laser.wavelength_nm)
    }

    pub fn mixing(&self) -> Result<MixingParameters, CliError> {
        MixingParameters::new(
            self.omega_ev(),
            self.axion.g_a_gev_inv,
            self.magnet.b_ext_t,
            self.axion.m_a_ev,
        )
        .map_err(|e| CliError::Config(format!("axion: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }
}

/// Columns of the growth-series CSV written by `simulate`.
pub const SERIES_HEADER: [&str; 5] = [
    "n_traversal",
    "extraction",
    "central_loss_photons_per_s",
    "sideband_gain_photons_per_s",
    "center_minus_sidebands_photons_per_s",
];

pub const SIGNAL_COLUMNS: [&str; 3] = [SERIES_HEADER[2], SERIES_HEADER[3], SERIES_HEADER[4]];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse_and_round_trip() {
        for (name, text) in PRESETS {
            let s = parse(text, &[]).unwrap();
            assert_eq!(s.name, name);
            let again = parse(&s.to_toml(), &[]).unwrap();
            assert_eq!(again, s);
        }
    }

    #[test]
    fn table1_matches_engine_preset() {
        let s = parse(preset_text("table1.confocal").unwrap(), &[]).unwrap();
        let c = s.cavity_config().unwrap();
        assert_eq!(c, axsplit::cavity::build_preset(CavityKind::Confocal));
        let s = parse(preset_text("convex-concave").unwrap(), &[]).unwrap();
        assert_eq!(
            s.cavity_config().unwrap(),
            axsplit::cavity::build_preset(CavityKind::ConvexConcave)
        );
    }

    #[test]
    fn overrides_nest_and_type() {
        let s = parse(
            preset_text("table1.confocal").unwrap(),
            &[
                "cavity.theta_split_rad=0".into(),
                "cavity.n_traversals = 3".into(),
                "name=custom".into(),
                "analysis.central_pixel_m=[0.0, 2e-4]".into(),
            ],
        )
        .unwrap();
        assert_eq!(s.cavity.theta_split_rad, 0.0);
        assert_eq!(s.cavity.n_traversals, 3);
        assert_eq!(s.name, "custom");
        assert_eq!(s.analysis.central_pixel_m, [0.0, 2e-4]);
    }

    #[test]
    fn bad_documents_are_config_errors() {
        let text = preset_text("table1.confocal").unwrap();
        for o in [
            "cavity.gap_m=3",
            "laser.waist_m=-1",
            "cavity.colour=1",
            "cavity.n_traversals=0",
            "magnet.field_length_m=9",
            "cavity.theta_split_rad.x=1",
            "novalue",
        ] {
            let err = parse(text, &[o.into()]).unwrap_err();
            assert!(matches!(err, CliError::Config(_)), "{o}: {err:?}");
        }
    }

    #[test]
    fn omega_defaults_to_laser_photon() {
        let s = parse(preset_text("table1.confocal").unwrap(), &[]).unwrap();
        let s = ScenarioFile {
            axion: AxionSection {
                omega_ev: None,
                ..s.axion
            },
            ..s
        };
        assert!((s.omega_ev() - 1.165).abs() < 1e-3);
    }
}
