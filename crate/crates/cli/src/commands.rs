use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use axsplit::axion::{mass_scan, max_measurable_mass, write_mass_scan_csv};
use axsplit::format_sci;
use axsplit::pascal::compare_growth;
use axsplit::profile::{
    deficit_with_broadening, density_deficit, write_deficit_csv, GaussianProfile,
};
use axsplit::sensitivity::{
    classify_growth, fit, scenario_report, FitKind, GrowthFit, GrowthSeries, ReportInputs,
    ScenarioReport,
};
use axsplit::signal::{detector_signals, TraversalSignal};
use serde::{Deserialize, Serialize};

use crate::config::{ScenarioFile, SERIES_HEADER};
use crate::error::CliError;

pub const SERIES_FILE: &str = "growth_series.csv";
pub const REPORT_FILE: &str = "report.json";

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    fs::create_dir_all(dir).map_err(CliError::io(format!("cannot create {}", dir.display())))?;
    let path = dir.join(name);
    let file =
        File::create(&path).map_err(CliError::io(format!("cannot write {}", path.display())))?;
    Ok(BufWriter::new(file))
}

fn finish(mut w: BufWriter<File>, name: &str) -> Result<(), CliError> {
    w.flush()
        .map_err(CliError::io(format!("cannot write {name}")))
}

pub fn difference_file(traversal: usize) -> String {
    format!("difference_t{traversal:04}.csv")
}

pub struct SimulateSummary {
    pub signals: Vec<TraversalSignal>,
    pub files: Vec<PathBuf>,
}

pub fn simulate(scenario: &ScenarioFile, out: &Path) -> Result<SimulateSummary, CliError> {
    let config = scenario.cavity_config()?;
    let settings = scenario.detector_settings()?;
    let signals = detector_signals(&config, &settings)?;
    let mut files = Vec::new();
    for s in &signals {
        let name = difference_file(s.traversal);
        let mut w = create(out, &name)?;
        s.difference
            .write_csv(&mut w)
            .map_err(CliError::io(format!("cannot write {name}")))?;
        finish(w, &name)?;
        files.push(out.join(name));
    }
    let w = create(out, SERIES_FILE)?;
    let mut csv = csv::Writer::from_writer(w);
    let err = |e: csv::Error| CliError::Series(e.to_string());
    csv.write_record(SERIES_HEADER).map_err(err)?;
    for s in &signals {
        csv.write_record([
            s.traversal.to_string(),
            s.extraction.to_string(),
            format_sci(s.central_loss),
            format_sci(s.sideband_gain),
            format_sci(s.sideband_signal),
        ])
        .map_err(err)?;
    }
    csv.flush().map_err(CliError::io(SERIES_FILE))?;
    files.push(out.join(SERIES_FILE));
    Ok(SimulateSummary { signals, files })
}

/// Reads `(x, y)` pairs from a growth-series CSV by column name.
pub fn read_series(path: &Path, x_column: &str, y_column: &str) -> Result<GrowthSeries, CliError> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::Series(format!("{}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::Series(e.to_string()))?
        .clone();
    let index = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| CliError::Series(format!("no column {name:?} in {}", path.display())))
    };
    let (ix, iy) = (index(x_column)?, index(y_column)?);
    let mut points = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Series(e.to_string()))?;
        let value = |i: usize| -> Result<f64, CliError> {
            let field = record.get(i).unwrap_or("").trim();
            field.parse().map_err(|_| {
                CliError::Series(format!("row {}: {field:?} is not a number", line + 1))
            })
        };
        points.push((value(ix)?, value(iy)?));
    }
    Ok(GrowthSeries::new(points)?)
}

/// Report JSON: the scenario report plus the modulation flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    #[serde(flatten)]
    pub report: ScenarioReport,
    pub modulated: bool,
}

#[derive(Debug, Clone, Default)]
pub struct AnalyzeOptions {
    pub series: Option<PathBuf>,
    pub fit_kind: Option<FitKind>,
    pub n_target: Option<f64>,
    pub g_ref: Option<f64>,
    pub x_column: Option<String>,
    pub column: Option<String>,
}

pub fn analyze(
    scenario: &ScenarioFile,
    opts: &AnalyzeOptions,
    out: &Path,
) -> Result<ReportDocument, CliError> {
    let a = &scenario.analysis;
    let growth_fit: GrowthFit = match &opts.series {
        Some(path) => {
            let x = opts.x_column.as_deref().unwrap_or("extraction");
            let y = opts.column.as_deref().unwrap_or(&a.signal_column);
            let series = read_series(path, x, y)?;
            fit(&series, opts.fit_kind.unwrap_or(a.fit_kind))?
        }
        None => a.fit.ok_or_else(|| {
            CliError::Config("no --series given and the scenario has no analysis.fit".into())
        })?,
    };
    let report = scenario_report(&ReportInputs {
        scenario: scenario.name.clone(),
        fit: growth_fit,
        extraction_count: opts.n_target.unwrap_or(a.extraction_count),
        total_photons: a.total_photons,
        noise_photons: a.noise_photons,
        integration_time: a.integration_time_s,
        g_ref: opts.g_ref.unwrap_or(a.g_ref_gev_inv),
    })?;
    let doc = ReportDocument {
        report,
        modulated: scenario.magnet.modulated,
    };
    let mut w = create(out, REPORT_FILE)?;
    serde_json::to_writer_pretty(&mut w, &doc).map_err(|e| CliError::Series(e.to_string()))?;
    writeln!(w).map_err(CliError::io(REPORT_FILE))?;
    finish(w, REPORT_FILE)?;
    Ok(doc)
}

#[derive(Debug, Clone, Default)]
pub struct ProfileOptions {
    pub alpha: Option<f64>,
    pub epsilon: f64,
    pub waist: Option<f64>,
    pub amplitude: Option<f64>,
    pub x_max: Option<f64>,
    pub points: usize,
}

/// Writes `deficit.csv` (with broadening) and, when epsilon is zero,
/// `deficit_expanded.csv` in the expanded form. Returns the alpha used.
pub fn profile(
    scenario: &ScenarioFile,
    opts: &ProfileOptions,
    out: &Path,
) -> Result<f64, CliError> {
    let alpha = opts
        .alpha
        .unwrap_or(scenario.cavity.theta_split_rad * scenario.cavity.cavity_length_m);
    let p = GaussianProfile::new(
        opts.amplitude
            .unwrap_or(scenario.laser.amplitude_photons_per_s),
        opts.waist.unwrap_or(scenario.laser.waist_m),
        0.0,
    )?;
    let x_max = opts.x_max.unwrap_or(3.0 * p.waist);
    if x_max.is_nan() || x_max <= 0.0 || opts.points < 2 {
        return Err(CliError::Config(
            "profile needs x_max > 0 and at least 2 points".into(),
        ));
    }
    let xs: Vec<f64> = (0..opts.points)
        .map(|i| -x_max + 2.0 * x_max * i as f64 / (opts.points - 1) as f64)
        .collect();
    let broadened = xs
        .iter()
        .map(|&x| Ok((x, deficit_with_broadening(x, alpha, opts.epsilon, &p)?)))
        .collect::<Result<Vec<_>, axsplit::Error>>()?;
    let mut w = create(out, "deficit.csv")?;
    write_deficit_csv(&broadened, &mut w).map_err(CliError::io("deficit.csv"))?;
    finish(w, "deficit.csv")?;
    if opts.epsilon == 0.0 {
        let expanded = xs
            .iter()
            .map(|&x| Ok((x, density_deficit(x, alpha, &p)?)))
            .collect::<Result<Vec<_>, axsplit::Error>>()?;
        let mut w = create(out, "deficit_expanded.csv")?;
        write_deficit_csv(&expanded, &mut w).map_err(CliError::io("deficit_expanded.csv"))?;
        finish(w, "deficit_expanded.csv")?;
    }
    Ok(alpha)
}

#[derive(Debug, Clone, Default)]
pub struct ScanOptions {
    pub m_min: Option<f64>,
    pub m_max: Option<f64>,
    pub steps: Option<usize>,
    pub log: Option<bool>,
}

pub struct ScanSummary {
    pub rows: usize,
    /// Mass where the suppression falls to one half (eV).
    pub half_mass: Option<f64>,
    pub g_min: Option<f64>,
}

pub fn mass_scan_cmd(
    scenario: &ScenarioFile,
    opts: &ScanOptions,
    out: &Path,
) -> Result<ScanSummary, CliError> {
    let ax = &scenario.axion;
    let p = scenario.mixing()?;
    let rows = mass_scan(
        &p,
        opts.m_min.unwrap_or(ax.scan_min_ev),
        opts.m_max.unwrap_or(ax.scan_max_ev),
        opts.steps.unwrap_or(ax.scan_steps),
        opts.log.unwrap_or(ax.scan_log),
    )?;
    let g_min = match scenario.analysis.fit {
        Some(f) => {
            let a = &scenario.analysis;
            scenario_report(&ReportInputs {
                scenario: scenario.name.clone(),
                fit: f,
                extraction_count: a.extraction_count,
                total_photons: a.total_photons,
                noise_photons: a.noise_photons,
                integration_time: a.integration_time_s,
                g_ref: a.g_ref_gev_inv,
            })?
            .g_min_integrated
        }
        None => None,
    };
    let mut w = create(out, "mass_scan.csv")?;
    write_mass_scan_csv(&rows, g_min, &mut w).map_err(CliError::io("mass_scan.csv"))?;
    finish(w, "mass_scan.csv")?;
    Ok(ScanSummary {
        rows: rows.len(),
        half_mass: max_measurable_mass(&p.with_mass(0.0), 0.5).ok(),
        g_min,
    })
}

pub fn pascal(n_passes: usize, pass_length: f64, out: &Path) -> Result<String, CliError> {
    let cmp = compare_growth(n_passes, pass_length)?;
    let mut w = create(out, "pascal.csv")?;
    cmp.write_csv(&mut w).map_err(CliError::io("pascal.csv"))?;
    finish(w, "pascal.csv")?;
    let (fb, fp) = cmp.growth_factors();
    let slope = |s: Option<f64>| s.map_or("n/a".to_string(), |v| format!("{v:.4}"));
    Ok(format!(
        "spread growth over {n_passes} passes: bifurcation x{fb:.4e}, pascal x{fp:.4e}; \
         log-log slopes on passes {}..{}: bifurcation {}, pascal {}",
        cmp.fit_window.0,
        cmp.fit_window.1,
        slope(cmp.slope_bifurcation),
        slope(cmp.slope_pascal)
    ))
}

/// One-line description of the growth of a simulated column.
pub fn describe_growth(signals: &[TraversalSignal], pick: fn(&TraversalSignal) -> f64) -> String {
    if signals.len() < 3 {
        return "too few extractions to fit".into();
    }
    let series = signals
        .iter()
        .map(|s| (s.traversal as f64, pick(s)))
        .collect();
    let Ok(series) = GrowthSeries::new(series) else {
        return "series not fittable".into();
    };
    match classify_growth(&series) {
        Ok(c) => format!(
            "linear R^2 {:.5}, power-law exponent {:.4} (R^2 {:.5})",
            c.linear.r_squared(),
            match c.power {
                GrowthFit::Power { exponent, .. } => exponent,
                GrowthFit::Linear { .. } => f64::NAN,
            },
            c.power.r_squared()
        ),
        Err(e) => format!("no fit: {e}"),
    }
}
