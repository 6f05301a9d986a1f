//! Toy lattice: a planar cavity filled with field, where every pass splits each
//! beam into ±1 momentum quanta. Two bookkeepings are compared: momentum
//! carried through reflections (bifurcation) and momentum reset to zero at
//! each reflection (Pascal triangle).

use std::collections::{BTreeMap, HashMap};
use std::io::{self, Write};

use crate::error::{invalid, Result};
use crate::format_sci;
use crate::sensitivity::{fit_power, GrowthFit, GrowthSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LatticeModel {
    Bifurcation,
    Pascal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeBeam {
    /// Transverse momentum in splitting quanta.
    pub momentum: i64,
    /// Transverse position (m, unit angle per quantum).
    pub position: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeEnsemble {
    pub beams: Vec<LatticeBeam>,
}

impl LatticeEnsemble {
    pub fn initial() -> Self {
        LatticeEnsemble {
            beams: vec![LatticeBeam {
                momentum: 0,
                position: 0.0,
                weight: 1.0,
            }],
        }
    }

    pub fn total_weight(&self) -> f64 {
        self.beams.iter().map(|b| b.weight).sum()
    }

    pub fn mean_position(&self) -> f64 {
        self.beams
            .iter()
            .map(|b| b.weight * b.position)
            .sum::<f64>()
            / self.total_weight()
    }

    pub fn mean_momentum(&self) -> f64 {
        self.beams
            .iter()
            .map(|b| b.weight * b.momentum as f64)
            .sum::<f64>()
            / self.total_weight()
    }

    pub fn rms_position(&self) -> f64 {
        let m = self.mean_position();
        let var = self
            .beams
            .iter()
            .map(|b| b.weight * (b.position - m).powi(2))
            .sum::<f64>()
            / self.total_weight();
        var.sqrt()
    }
}

fn step(ensemble: &LatticeEnsemble, pass_length: f64, model: LatticeModel) -> LatticeEnsemble {
    let mut index: HashMap<(i64, u64), usize> = HashMap::new();
    let mut beams: Vec<LatticeBeam> = Vec::with_capacity(2 * ensemble.beams.len());
    for b in &ensemble.beams {
        let carried = match model {
            LatticeModel::Bifurcation => b.momentum,
            LatticeModel::Pascal => 0,
        };
        for kick in [1, -1] {
            let momentum = carried + kick;
            let position = b.position + momentum as f64 * pass_length;
            let weight = 0.5 * b.weight;
            match index.entry((momentum, position.to_bits())) {
                std::collections::hash_map::Entry::Occupied(e) => beams[*e.get()].weight += weight,
                std::collections::hash_map::Entry::Vacant(e) => {
                    e.insert(beams.len());
                    beams.push(LatticeBeam {
                        momentum,
                        position,
                        weight,
                    });
                }
            }
        }
    }
    LatticeEnsemble { beams }
}

/// One pass: each beam splits into momentum ±1 children of half weight which
/// then cross the pass; momentum survives the reflection.
pub fn step_bifurcation(ensemble: &LatticeEnsemble, pass_length: f64) -> LatticeEnsemble {
    step(ensemble, pass_length, LatticeModel::Bifurcation)
}

/// As [`step_bifurcation`] but momentum is reset to zero at the reflection.
pub fn step_pascal(ensemble: &LatticeEnsemble, pass_length: f64) -> LatticeEnsemble {
    step(ensemble, pass_length, LatticeModel::Pascal)
}

pub fn run_lattice(model: LatticeModel, n_passes: usize, pass_length: f64) -> LatticeEnsemble {
    let mut e = LatticeEnsemble::initial();
    for _ in 0..n_passes {
        e = step(&e, pass_length, model);
    }
    e
}

/// Weight per momentum value.
pub fn momentum_spectrum(ensemble: &LatticeEnsemble) -> BTreeMap<i64, f64> {
    let mut out = BTreeMap::new();
    for b in &ensemble.beams {
        *out.entry(b.momentum).or_insert(0.0) += b.weight;
    }
    out
}

/// Second moments of the (momentum, position) distribution, advanced exactly
/// without enumerating beams. Means vanish by symmetry.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LatticeMoments {
    pub momentum_sq: f64,
    pub cross: f64,
    pub position_sq: f64,
}

impl LatticeMoments {
    pub fn step(&self, pass_length: f64, model: LatticeModel) -> Self {
        let l = pass_length;
        match model {
            LatticeModel::Bifurcation => {
                let p2 = self.momentum_sq + 1.0;
                LatticeMoments {
                    momentum_sq: p2,
                    cross: self.cross + l * p2,
                    position_sq: self.position_sq + 2.0 * l * self.cross + l * l * p2,
                }
            }
            LatticeModel::Pascal => LatticeMoments {
                momentum_sq: 1.0,
                cross: l,
                position_sq: self.position_sq + l * l,
            },
        }
    }

    pub fn rms_position(&self) -> f64 {
        self.position_sq.sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRow {
    pub n_pass: usize,
    pub distance: f64,
    pub spread_bifurcation: f64,
    pub spread_pascal: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthComparison {
    pub rows: Vec<ComparisonRow>,
    /// Passes `[lo, hi]` used for the log-log slopes.
    pub fit_window: (usize, usize),
    pub slope_bifurcation: Option<f64>,
    pub slope_pascal: Option<f64>,
}

impl GrowthComparison {
    /// Spread ratios relative to the first pass.
    pub fn growth_factors(&self) -> (f64, f64) {
        let first = self.rows[0];
        let last = self.rows[self.rows.len() - 1];
        (
            last.spread_bifurcation / first.spread_bifurcation,
            last.spread_pascal / first.spread_pascal,
        )
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "n_pass,distance_m,spread_bifurcation,spread_pascal")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{}",
                r.n_pass,
                format_sci(r.distance),
                format_sci(r.spread_bifurcation),
                format_sci(r.spread_pascal)
            )?;
        }
        Ok(())
    }
}

fn loglog_slope(rows: &[ComparisonRow], pick: impl Fn(&ComparisonRow) -> f64) -> Option<f64> {
    let series =
        GrowthSeries::new(rows.iter().map(|r| (r.n_pass as f64, pick(r))).collect()).ok()?;
    match fit_power(&series).ok()? {
        GrowthFit::Power { exponent, .. } => Some(exponent),
        GrowthFit::Linear { .. } => None,
    }
}

/// RMS position spread of both models for passes `1..=n_passes`, with
/// log-log slopes over the last two decades.
pub fn compare_growth(n_passes: usize, pass_length: f64) -> Result<GrowthComparison> {
    if n_passes == 0 {
        return Err(invalid("need at least one pass"));
    }
    if !(pass_length > 0.0) || !pass_length.is_finite() {
        return Err(invalid(format!(
            "pass length must be > 0, got {pass_length}"
        )));
    }
    let mut bif = LatticeMoments::default();
    let mut pas = LatticeMoments::default();
    let mut rows = Vec::with_capacity(n_passes);
    for n in 1..=n_passes {
        bif = bif.step(pass_length, LatticeModel::Bifurcation);
        pas = pas.step(pass_length, LatticeModel::Pascal);
        rows.push(ComparisonRow {
            n_pass: n,
            distance: n as f64 * pass_length,
            spread_bifurcation: bif.rms_position(),
            spread_pascal: pas.rms_position(),
        });
    }
    let lo = (n_passes / 100).max(1);
    let window = &rows[lo - 1..];
    Ok(GrowthComparison {
        slope_bifurcation: loglog_slope(window, |r| r.spread_bifurcation),
        slope_pascal: loglog_slope(window, |r| r.spread_pascal),
        fit_window: (lo, n_passes),
        rows,
    })
}
